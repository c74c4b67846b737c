#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nextedit/error.hpp"

namespace nextedit {

using Lines = std::vector<std::string>;

enum class Language { Python, Go, Java, JavaScript, TypeScript };

std::string_view to_string(Language lang) noexcept;
Language language_from_string(std::string_view name);
std::span<const std::string_view> source_extensions(Language lang) noexcept;
bool is_source_file(std::string_view path, Language lang) noexcept;

/// 1-based inclusive line range. `end == start - 1` denotes the empty range
/// sitting just before line `start` (the anchor of a pure insertion).
struct LineSpan {
  int start = 1;
  int end = 0;

  int length() const noexcept { return end - start + 1; }
  bool empty() const noexcept { return end < start; }
  bool contains(int line) const noexcept { return line >= start && line <= end; }
  bool intersects(const LineSpan& other) const noexcept {
    return !empty() && !other.empty() && start <= other.end && other.start <= end;
  }
  friend bool operator==(const LineSpan&, const LineSpan&) = default;
  friend auto operator<=>(const LineSpan&, const LineSpan&) = default;
};

/// Fraction of `gold` covered by `predicted`. Both spans must be nonempty.
double line_overlap_ratio(const LineSpan& predicted, const LineSpan& gold);

/// The text of one file as lines split on '\n'. A missing final newline is
/// remembered so that str() reproduces the original bytes.
struct TextFile {
  Lines lines;
  bool trailing_newline = true;

  static TextFile parse(std::string_view text);
  std::string str() const;
  int line_count() const noexcept { return static_cast<int>(lines.size()); }
  friend bool operator==(const TextFile&, const TextFile&) = default;
};

Lines split_lines(std::string_view text);
std::string join_lines(std::span<const std::string> lines, std::string_view sep = "\n");

/// Forward slashes, no `.`/`..` segments, no leading slash. Throws
/// InvalidPath when the path escapes the project root.
std::string normalize_path(std::string_view path);

/// One atomic change. Coordinates refer to the file state immediately before
/// the edit is applied.
struct Edit {
  std::string file;
  int line_start = 1;
  int line_end = 0;
  Lines code_before;
  Lines code_after;
  std::uint64_t timestamp = 0;

  LineSpan old_span() const noexcept { return {line_start, line_end}; }
  /// Span occupied by code_after once the edit is applied.
  LineSpan new_span() const noexcept {
    return {line_start, line_start + static_cast<int>(code_after.size()) - 1};
  }
  int line_delta() const noexcept {
    return static_cast<int>(code_after.size()) - static_cast<int>(code_before.size());
  }
  bool is_noop() const noexcept { return code_before == code_after; }

  /// Span used when matching locations: the edited lines, or for a pure
  /// insertion the line just above the insertion point.
  LineSpan location() const noexcept;

  Edit inverse() const;
  /// Checks the structural invariants (span/length agreement, path form).
  void validate() const;

  friend bool operator==(const Edit&, const Edit&) = default;
};

/// A snapshot of the project's source files. Copies share unchanged file
/// bodies, so apply_edit is cheap even on large projects.
class Project {
 public:
  explicit Project(Language lang = Language::Python) : language_(lang) {}

  Language language() const noexcept { return language_; }

  bool has_file(std::string_view path) const;
  const TextFile& file(std::string_view path) const;
  void set_file(std::string path, TextFile content);
  void set_file(std::string path, std::string_view text) { set_file(std::move(path), TextFile::parse(text)); }
  void remove_file(std::string_view path);
  std::vector<std::string> paths() const;
  std::size_t file_count() const noexcept { return files_.size(); }

  /// Loads every source file of `lang` under root (hidden directories skipped).
  static Project load(const std::filesystem::path& root, Language lang);
  void write(const std::filesystem::path& root) const;

  friend bool operator==(const Project& a, const Project& b);

 private:
  Language language_;
  std::map<std::string, std::shared_ptr<const TextFile>, std::less<>> files_;
};

/// Splices code_after in place of code_before. Throws FileMissing or
/// ContentMismatch; the input project is never modified.
Project apply_edit(const Project& project, const Edit& edit);

/// Moves `span` (in the coordinates before `applied`) into the coordinates
/// after it. Returns nullopt when the span overlaps the applied edit's range.
std::optional<LineSpan> rebase_span(const LineSpan& span, const std::string& file, const Edit& applied);

/// Rebases `pending` past `applied`; nullopt if the two overlap.
std::optional<Edit> rebase_edit(const Edit& pending, const Edit& applied);

struct EditSession {
  std::filesystem::path project_root;
  std::vector<Edit> prior_edits;
  std::optional<std::string> prompt;

  /// Appends and stamps the edit with the next timestamp.
  void append(Edit edit);
  const Edit& latest() const;
};

/// Lines (current coordinates) touched by each edit of a chronologically
/// ordered sequence, tracked through the line shifts of later edits.
std::map<std::string, std::vector<int>> modified_lines(std::span<const Edit> edits);

/// Where each edit's post-edit content currently sits, or nullopt when a later
/// edit overwrote it.
std::vector<std::optional<LineSpan>> current_spans(std::span<const Edit> edits);

}  // namespace nextedit
