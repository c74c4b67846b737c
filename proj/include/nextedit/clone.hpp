#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nextedit/core.hpp"
#include "nextedit/tokenizer.hpp"

namespace nextedit {

struct CloneHit {
  std::string file;
  LineSpan span;
  double similarity = 0.0;
};

/// Token texts used for clone matching: identifiers collapse to one
/// placeholder, comments are dropped.
std::vector<std::string> clone_features(std::span<const std::string> lines, Language lang);
std::vector<std::string> clone_features(std::span<const SyntaxToken> tokens);

/// Multiset Jaccard, sum(min) / sum(max). Two empty inputs score 0.
double multiset_jaccard(std::span<const std::string> a, std::span<const std::string> b);

struct CloneQuery {
  Lines needle;
  double min_similarity = 0.7;
  /// The needle's own location, never reported.
  std::optional<std::string> exclude_file;
  LineSpan exclude_span{1, 0};
  /// Search exclude_file only.
  bool same_file_only = false;
};

/// Every |needle|-line window of the project at or above the threshold,
/// overlapping windows reduced to the most similar one. Sorted by similarity
/// (descending), then path and line.
std::vector<CloneHit> detect_clones(const CloneQuery& query, const Project& project);

}  // namespace nextedit
