#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "nextedit/core.hpp"

namespace nextedit {

using json = nlohmann::json;

// Edit <-> {file, line_start, line_end, code_before[], code_after[]}
void to_json(json& j, const Edit& e);
void from_json(const json& j, Edit& e);
void to_json(json& j, const LineSpan& s);
void from_json(const json& j, LineSpan& s);

/// One edit per line; timestamps are assigned from line order.
std::vector<Edit> read_edits_jsonl(const std::filesystem::path& path);
void write_edits_jsonl(const std::filesystem::path& path, const std::vector<Edit>& edits);

std::vector<json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace nextedit
