#include "nextedit/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace nextedit {

Bm25Index::Bm25Index(std::vector<std::vector<std::string>> docs, Bm25Params params) : params_(params) {
  docs_.resize(docs.size());
  lengths_.resize(docs.size());
  std::size_t total = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (auto& t : docs[d]) ++docs_[d][t];
    for (const auto& [term, _] : docs_[d]) ++df_[term];
    lengths_[d] = docs[d].size();
    total += docs[d].size();
  }
  avg_length_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
}

double Bm25Index::idf(const std::string& term) const {
  const auto it = df_.find(term);
  const double df = it == df_.end() ? 0.0 : it->second;
  const double n = static_cast<double>(docs_.size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::score(std::span<const std::string> query, std::size_t doc) const {
  const std::set<std::string> terms(query.begin(), query.end());
  const double len_norm = avg_length_ > 0 ? static_cast<double>(lengths_[doc]) / avg_length_ : 0.0;
  double s = 0.0;
  for (const auto& t : terms) {
    const auto it = docs_[doc].find(t);
    if (it == docs_[doc].end()) continue;
    const double tf = it->second;
    s += idf(t) * tf * (params_.k1 + 1.0) / (tf + params_.k1 * (1.0 - params_.b + params_.b * len_norm));
  }
  return s;
}

std::vector<double> Bm25Index::scores(std::span<const std::string> query) const {
  std::vector<double> out(docs_.size());
  for (std::size_t d = 0; d < docs_.size(); ++d) out[d] = score(query, d);
  return out;
}

std::vector<std::size_t> bm25_top_k(std::span<const std::string> query, std::vector<std::vector<std::string>> docs,
                                    std::size_t k, std::span<const std::uint64_t> recency, Bm25Params params) {
  const Bm25Index index(std::move(docs), params);
  const auto s = index.scores(query);
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  auto rec = [&](std::size_t i) -> std::uint64_t { return i < recency.size() ? recency[i] : i; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s[a] != s[b]) return s[a] > s[b];
    if (rec(a) != rec(b)) return rec(a) > rec(b);
    return a > b;
  });
  if (order.size() > k) order.resize(k);
  return order;
}

}  // namespace nextedit
