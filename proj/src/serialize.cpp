#include "nextedit/serialize.hpp"

#include <fstream>
#include <sstream>

namespace nextedit {

void to_json(json& j, const Edit& e) {
  j = json{{"file", e.file},
           {"line_start", e.line_start},
           {"line_end", e.line_end},
           {"code_before", e.code_before},
           {"code_after", e.code_after}};
}

void from_json(const json& j, Edit& e) {
  e.file = normalize_path(j.at("file").get<std::string>());
  e.line_start = j.at("line_start").get<int>();
  e.line_end = j.at("line_end").get<int>();
  e.code_before = j.at("code_before").get<Lines>();
  e.code_after = j.at("code_after").get<Lines>();
  e.validate();
}

void to_json(json& j, const LineSpan& s) { j = json::array({s.start, s.end}); }

void from_json(const json& j, LineSpan& s) {
  s.start = j.at(0).get<int>();
  s.end = j.at(1).get<int>();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> rows;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(json::parse(line));
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<Edit> read_edits_jsonl(const std::filesystem::path& path) {
  std::vector<Edit> edits;
  std::uint64_t ts = 0;
  for (const auto& row : read_jsonl(path)) {
    Edit e = row.get<Edit>();
    e.timestamp = ++ts;
    edits.push_back(std::move(e));
  }
  return edits;
}

void write_edits_jsonl(const std::filesystem::path& path, const std::vector<Edit>& edits) {
  std::vector<json> rows(edits.begin(), edits.end());
  write_jsonl(path, rows);
}

}  // namespace nextedit
