#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nextedit/core.hpp"

namespace nextedit {

/// A maximal run of changed lines. Spans follow the Edit convention: an empty
/// old_span (end == start - 1) means "insert before old line `start`".
struct Hunk {
  std::string file;
  LineSpan old_span;
  LineSpan new_span;
  Lines old_lines;
  Lines new_lines;
  // Unchanged lines git printed around the change, kept for window context.
  Lines context_before;
  Lines context_after;

  Edit to_edit() const;
  /// Whether the hunk's footprint touches the window `span` of `path`. A pure
  /// insertion touches a window when its insertion point lies inside it or
  /// directly after its last line.
  bool touches(std::string_view path, const LineSpan& span) const;
  void validate() const;

  friend bool operator==(const Hunk& a, const Hunk& b) {
    return a.file == b.file && a.old_span == b.old_span && a.new_span == b.new_span && a.old_lines == b.old_lines &&
           a.new_lines == b.new_lines;
  }
};

struct FileDiff {
  std::string old_path;
  std::string new_path;
  std::vector<Hunk> hunks;
};

/// Parses git-style unified diff text. Every @@ block is split at its context
/// lines, so each returned Hunk is one run of -/+ lines.
std::vector<Hunk> parse_unified_diff(std::string_view text);
std::vector<FileDiff> parse_unified_diff_files(std::string_view text);

/// Canonical zero-context unified diff; parse_unified_diff inverts it.
std::string render_unified_diff(std::span<const Hunk> hunks);

/// Minimal line-level diff grouped into hunks separated by >= 1 unchanged line.
std::vector<Hunk> diff_lines(std::span<const std::string> before, std::span<const std::string> after,
                             std::string_view file = "");

/// Applies hunks (all from one file, old coordinates) to `before`.
Lines apply_hunks(std::span<const std::string> before, std::span<const Hunk> hunks);

}  // namespace nextedit
