#include "nextedit/clone.hpp"

#include <algorithm>
#include <unordered_map>

#include "nextedit/error.hpp"

namespace nextedit {

namespace {
constexpr std::string_view kIdentifierPlaceholder = "$id";
}

std::vector<std::string> clone_features(std::span<const SyntaxToken> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t.kind == TokenKind::Comment) continue;
    out.emplace_back(t.kind == TokenKind::Identifier ? std::string(kIdentifierPlaceholder) : t.text);
  }
  return out;
}

std::vector<std::string> clone_features(std::span<const std::string> lines, Language lang) {
  return clone_features(tokenize(lines, lang));
}

double multiset_jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  std::unordered_map<std::string_view, std::pair<int, int>> counts;
  for (const auto& t : a) ++counts[t].first;
  for (const auto& t : b) ++counts[t].second;
  long inter = 0, uni = 0;
  for (const auto& [_, c] : counts) {
    inter += std::min(c.first, c.second);
    uni += std::max(c.first, c.second);
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<CloneHit> detect_clones(const CloneQuery& query, const Project& project) {
  if (query.needle.empty()) throw Error(ErrorCode::InvalidArgument, "empty clone needle");
  if (!(query.min_similarity > 0.0 && query.min_similarity <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "clone threshold must be in (0, 1]");
  const Language lang = project.language();
  std::unordered_map<std::string, int> needle;
  int needle_total = 0;
  for (auto& f : clone_features(query.needle, lang)) {
    ++needle[f];
    ++needle_total;
  }
  if (needle_total == 0) return {};
  const int n = static_cast<int>(query.needle.size());

  std::vector<CloneHit> hits;
  for (const auto& path : project.paths()) {
    if (query.same_file_only && path != query.exclude_file) continue;
    const auto& file = project.file(path);
    const int lines = file.line_count();
    if (lines < n) continue;
    std::vector<std::vector<std::string>> per_line(lines);
    for (const auto& t : tokenize(file.lines, lang)) {
      if (t.kind == TokenKind::Comment) continue;
      per_line[t.line - 1].emplace_back(t.kind == TokenKind::Identifier ? std::string(kIdentifierPlaceholder) : t.text);
    }
    std::unordered_map<std::string, int> window;
    long sum_min = 0, sum_max = needle_total;
    auto add = [&](const std::string& t) {
      const int c = window[t]++;
      const auto it = needle.find(t);
      const int need = it == needle.end() ? 0 : it->second;
      if (c < need) ++sum_min;
      if (c >= need) ++sum_max;
    };
    auto remove = [&](const std::string& t) {
      const int c = window[t]--;
      const auto it = needle.find(t);
      const int need = it == needle.end() ? 0 : it->second;
      if (c <= need) --sum_min;
      if (c > need) --sum_max;
    };
    for (int l = 0; l < lines; ++l) {
      for (const auto& t : per_line[l]) add(t);
      if (l >= n)
        for (const auto& t : per_line[l - n]) remove(t);
      if (l < n - 1) continue;
      const int first = l - n + 1;
      if (per_line[first].empty() || per_line[l].empty()) continue;
      const double sim = static_cast<double>(sum_min) / static_cast<double>(sum_max);
      if (sim + 1e-12 < query.min_similarity) continue;
      const LineSpan span{first + 1, l + 1};
      if (query.exclude_file && *query.exclude_file == path && span.intersects(query.exclude_span)) continue;
      hits.push_back({path, span, sim});
    }
  }
  std::stable_sort(hits.begin(), hits.end(), [](const CloneHit& a, const CloneHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.file != b.file) return a.file < b.file;
    return a.span.start < b.span.start;
  });
  std::vector<CloneHit> kept;
  for (const auto& h : hits) {
    const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const CloneHit& k) {
      return k.file == h.file && k.span.intersects(h.span);
    });
    if (!overlaps) kept.push_back(h);
  }
  return kept;
}

}  // namespace nextedit
