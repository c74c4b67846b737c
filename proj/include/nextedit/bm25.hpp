#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace nextedit {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Okapi BM25 over pre-tokenized documents. idf uses the non-negative form
/// ln(1 + (N - df + 0.5) / (df + 0.5)); each distinct query term counts once.
class Bm25Index {
 public:
  explicit Bm25Index(std::vector<std::vector<std::string>> docs, Bm25Params params = {});

  std::size_t size() const noexcept { return docs_.size(); }
  double idf(const std::string& term) const;
  double score(std::span<const std::string> query, std::size_t doc) const;
  std::vector<double> scores(std::span<const std::string> query) const;

 private:
  Bm25Params params_;
  std::vector<std::unordered_map<std::string, int>> docs_;
  std::vector<std::size_t> lengths_;
  std::unordered_map<std::string, int> df_;
  double avg_length_ = 0.0;
};

/// Indices of the top-k documents by score. Equal scores go to the larger
/// `recency` value first, then the later index.
std::vector<std::size_t> bm25_top_k(std::span<const std::string> query, std::vector<std::vector<std::string>> docs,
                                    std::size_t k, std::span<const std::uint64_t> recency = {},
                                    Bm25Params params = {});

}  // namespace nextedit
