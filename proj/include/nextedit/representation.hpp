#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nextedit/diff.hpp"
#include "nextedit/lcs.hpp"
#include "nextedit/tokenizer.hpp"

namespace nextedit {

enum class InlineLabel : std::uint8_t { Keep, Replace, Delete };
enum class InterLabel : std::uint8_t { Null, Insert, BlockSplit };

/// The six labels as one alphabet, for metrics over mixed positions.
enum class EditLabel : std::uint8_t { Keep, Replace, Delete, Null, Insert, BlockSplit };
inline constexpr int kEditLabelCount = 6;

EditLabel as_edit_label(InlineLabel l) noexcept;
EditLabel as_edit_label(InterLabel l) noexcept;
std::string_view tag(InlineLabel l) noexcept;
std::string_view tag(InterLabel l) noexcept;
std::string_view tag(EditLabel l) noexcept;
char letter(InlineLabel l) noexcept;  // K R D
char letter(InterLabel l) noexcept;   // N I B
std::optional<EditLabel> edit_label_from_tag(std::string_view tag) noexcept;

/// Token LCS where a match needs identical kind and text.
std::vector<MatchPair> lcs_match(std::span<const SyntaxToken> before, std::span<const SyntaxToken> after);

/// A run of old lines aligned with a run of new lines (0-based, inclusive).
struct MappedBlock {
  int old_first = 0;
  int old_last = 0;
  int new_first = 0;
  int new_last = 0;
  friend bool operator==(const MappedBlock&, const MappedBlock&) = default;
};

/// New lines (0-based, inclusive range) inserted at inter-line gap `gap`;
/// gap g sits before old line g, gap old_count after the last line.
struct InsertRun {
  int gap = 0;
  int new_first = 0;
  int new_last = 0;
  friend bool operator==(const InsertRun&, const InsertRun&) = default;
};

struct LineMapping {
  int old_count = 0;
  int new_count = 0;
  /// Per old line: the new line receiving the most of its matched tokens
  /// (ties to the smaller index), before anchoring and gap filling.
  std::vector<std::optional<int>> majority_target;
  std::vector<MappedBlock> blocks;
  std::vector<InsertRun> inserts;

  /// The block containing old line `old_line`, if any.
  const MappedBlock* block_of(int old_line) const noexcept;
};

using LineAnchor = std::pair<int, int>;  // (old line, new line), 0-based

/// Builds the line-level alignment from token matches. `anchors` pin old
/// lines to new lines regardless of votes (used for identical and
/// head-aligned lines). Throws InconsistentMapping on crossing alignments.
LineMapping token2line_mapping(std::span<const MatchPair> matches, std::span<const SyntaxToken> before,
                               std::span<const SyntaxToken> after, int old_count, int new_count,
                               std::span<const LineAnchor> anchors = {});

/// Full line alignment of two code versions: identical lines anchor first,
/// then lines opening with the same syntax element, then token LCS inside the
/// remaining gaps.
LineMapping align_lines(std::span<const std::string> old_lines, std::span<const std::string> new_lines,
                        Language lang);

struct ReplaceBlock {
  int old_first = 0;
  int old_last = 0;
  Lines new_lines;
  friend bool operator==(const ReplaceBlock&, const ReplaceBlock&) = default;
};

struct EnrichedHunk {
  Hunk hunk;
  std::vector<InlineLabel> inline_labels;
  std::vector<InterLabel> inter_labels;
  std::map<int, Lines> insert_blocks;
  std::vector<ReplaceBlock> replace_blocks;

  /// Number of distinct edit semantics among {delete, replace, insert}.
  int semantic_kinds() const noexcept;
  /// Checks the length law and the label/content agreement.
  void validate() const;
  bool same_encoding(const EnrichedHunk& other) const;
};

struct Labels {
  std::vector<InlineLabel> inline_labels;
  std::vector<InterLabel> inter_labels;
};

/// Assigns inline and inter-line labels from a mapping.
Labels convert_to_labels(const LineMapping& mapping, std::span<const std::string> old_lines,
                         std::span<const std::string> new_lines);

/// Translates a git-diff hunk into the six-label representation.
EnrichedHunk enrich(const Hunk& hunk, Language lang);

/// Regenerates the new-version lines from labels and attached content.
Lines reconstruct(const EnrichedHunk& e);

/// Text encoding: inter labels on their own lines, each old line prefixed by
/// its inline label, then `<POST-EDIT>` followed by one `<INSERT>`/`<REPLACE>`
/// section per content block, content lines prefixed with '+'.
std::string render_enriched(const EnrichedHunk& e);
EnrichedHunk parse_enriched(std::string_view text);

/// Old-version part of the encoding only (labels + code), no post-edit code.
std::string render_labeled_code(std::span<const std::string> lines, std::span<const InlineLabel> inline_labels,
                                std::span<const InterLabel> inter_labels);

std::string escape_sentinels(std::string_view code);
std::string unescape_sentinels(std::string_view code);

/// Percentage (0-100) of hunks mixing two or more of delete/replace/insert.
double multi_semantic_ratio(std::span<const Hunk> hunks, Language lang);
double multi_semantic_ratio(std::span<const EnrichedHunk> hunks);

}  // namespace nextedit
