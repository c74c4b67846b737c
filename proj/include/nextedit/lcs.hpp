#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace nextedit {

using MatchPair = std::pair<int, int>;

namespace detail {

// Above this many DP cells the quadratic table is replaced by Myers' O(ND)
// search, which still returns a longest common subsequence.
inline constexpr std::size_t kMaxDpCells = std::size_t{1} << 22;

template <class T, class Eq>
void lcs_dp(std::span<const T> a, std::span<const T> b, int a_off, int b_off, Eq& eq, std::vector<MatchPair>& out) {
  const std::size_t n = a.size(), m = b.size();
  // suffix[i][j] = LCS(a[i:], b[j:])
  std::vector<std::uint32_t> suffix((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return suffix[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = eq(a[i], b[j]) ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
    }
  }
  // Leftmost-greedy walk: match whenever possible, otherwise skip in `b`
  // first so earlier elements of `a` stay available.
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (eq(a[i], b[j])) {
      out.emplace_back(a_off + static_cast<int>(i), b_off + static_cast<int>(j));
      ++i;
      ++j;
    } else if (at(i, j + 1) == at(i, j)) {
      ++j;
    } else {
      ++i;
    }
  }
}

template <class T, class Eq>
void lcs_myers(std::span<const T> a, std::span<const T> b, int a_off, int b_off, Eq& eq, std::vector<MatchPair>& out) {
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  const int max = n + m;
  std::vector<int> v(2 * static_cast<std::size_t>(max) + 3, 0);
  const int off = max + 1;
  std::vector<std::vector<int>> trace;
  int found_d = -1;
  for (int d = 0; d <= max && found_d < 0; ++d) {
    for (int k = -d; k <= d; k += 2) {
      int x = (k == -d || (k != d && v[off + k - 1] < v[off + k + 1])) ? v[off + k + 1] : v[off + k - 1] + 1;
      int y = x - k;
      while (x < n && y < m && eq(a[x], b[y])) {
        ++x;
        ++y;
      }
      v[off + k] = x;
      if (x >= n && y >= m) found_d = d;
    }
    trace.emplace_back(v.begin() + (off - d), v.begin() + (off + d + 1));
  }
  std::vector<MatchPair> rev;
  int x = n, y = m;
  for (int d = found_d; d > 0; --d) {
    const auto& prev = trace[d - 1];  // indices k + (d - 1)
    auto pv = [&](int k) { return prev[k + d - 1]; };
    const int k = x - y;
    const int prev_k = (k == -d || (k != d && pv(k - 1) < pv(k + 1))) ? k + 1 : k - 1;
    const int prev_x = pv(prev_k);
    const int prev_y = prev_x - prev_k;
    while (x > prev_x && y > prev_y) {
      rev.emplace_back(a_off + x - 1, b_off + y - 1);
      --x;
      --y;
    }
    x = prev_x;
    y = prev_y;
  }
  while (x > 0 && y > 0) {
    rev.emplace_back(a_off + x - 1, b_off + y - 1);
    --x;
    --y;
  }
  out.insert(out.end(), rev.rbegin(), rev.rend());
}

}  // namespace detail

/// Longest common subsequence of `a` and `b` as strictly increasing index
/// pairs. Ties are broken leftmost-greedy (earlier elements of `a` matched
/// first); inputs larger than the DP budget fall back to Myers' algorithm.
template <class T, class Eq = std::equal_to<>>
std::vector<MatchPair> longest_common_subsequence(std::span<const T> a, std::span<const T> b, Eq eq = {}) {
  std::vector<MatchPair> out;
  std::size_t lo = 0;
  while (lo < a.size() && lo < b.size() && eq(a[lo], b[lo])) {
    out.emplace_back(static_cast<int>(lo), static_cast<int>(lo));
    ++lo;
  }
  std::size_t ta = a.size(), tb = b.size();
  while (ta > lo && tb > lo && eq(a[ta - 1], b[tb - 1])) {
    --ta;
    --tb;
  }
  auto mid_a = a.subspan(lo, ta - lo);
  auto mid_b = b.subspan(lo, tb - lo);
  if (!mid_a.empty() && !mid_b.empty()) {
    if (mid_a.size() * mid_b.size() <= detail::kMaxDpCells)
      detail::lcs_dp(mid_a, mid_b, static_cast<int>(lo), static_cast<int>(lo), eq, out);
    else
      detail::lcs_myers(mid_a, mid_b, static_cast<int>(lo), static_cast<int>(lo), eq, out);
  }
  for (std::size_t k = 0; ta + k < a.size(); ++k)
    out.emplace_back(static_cast<int>(ta + k), static_cast<int>(tb + k));
  return out;
}

}  // namespace nextedit
