#include "nextedit/representation.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace nextedit {

EditLabel as_edit_label(InlineLabel l) noexcept {
  switch (l) {
    case InlineLabel::Keep: return EditLabel::Keep;
    case InlineLabel::Replace: return EditLabel::Replace;
    case InlineLabel::Delete: return EditLabel::Delete;
  }
  return EditLabel::Keep;
}

EditLabel as_edit_label(InterLabel l) noexcept {
  switch (l) {
    case InterLabel::Null: return EditLabel::Null;
    case InterLabel::Insert: return EditLabel::Insert;
    case InterLabel::BlockSplit: return EditLabel::BlockSplit;
  }
  return EditLabel::Null;
}

std::string_view tag(EditLabel l) noexcept {
  switch (l) {
    case EditLabel::Keep: return "<KEEP>";
    case EditLabel::Replace: return "<REPLACE>";
    case EditLabel::Delete: return "<DELETE>";
    case EditLabel::Null: return "<NULL>";
    case EditLabel::Insert: return "<INSERT>";
    case EditLabel::BlockSplit: return "<BLOCK-SPLIT>";
  }
  return "<NULL>";
}

std::string_view tag(InlineLabel l) noexcept { return tag(as_edit_label(l)); }
std::string_view tag(InterLabel l) noexcept { return tag(as_edit_label(l)); }

char letter(InlineLabel l) noexcept { return l == InlineLabel::Keep ? 'K' : l == InlineLabel::Replace ? 'R' : 'D'; }
char letter(InterLabel l) noexcept { return l == InterLabel::Null ? 'N' : l == InterLabel::Insert ? 'I' : 'B'; }

std::optional<EditLabel> edit_label_from_tag(std::string_view t) noexcept {
  for (int i = 0; i < kEditLabelCount; ++i) {
    auto l = static_cast<EditLabel>(i);
    if (tag(l) == t) return l;
    // bare names such as "REPLACE" or "BLOCK-SPLIT" are accepted too
    if (tag(l).substr(1, tag(l).size() - 2) == t) return l;
  }
  return std::nullopt;
}

std::vector<MatchPair> lcs_match(std::span<const SyntaxToken> before, std::span<const SyntaxToken> after) {
  return longest_common_subsequence(before, after,
                                    [](const SyntaxToken& a, const SyntaxToken& b) { return a.same_element(b); });
}

const MappedBlock* LineMapping::block_of(int old_line) const noexcept {
  for (const auto& b : blocks)
    if (old_line >= b.old_first && old_line <= b.old_last) return &b;
  return nullptr;
}

namespace {

template <class Map>
std::optional<int> argmax(const Map& counts) {
  std::optional<int> best;
  int best_count = 0;
  for (const auto& [key, count] : counts) {  // ascending keys: ties keep the smaller
    if (count > best_count) {
      best = key;
      best_count = count;
    }
  }
  return best;
}

[[noreturn]] void inconsistent(const std::string& why) { throw Error(ErrorCode::InconsistentMapping, why); }

}  // namespace

LineMapping token2line_mapping(std::span<const MatchPair> matches, std::span<const SyntaxToken> before,
                               std::span<const SyntaxToken> after, int old_count, int new_count,
                               std::span<const LineAnchor> anchors) {
  LineMapping m;
  m.old_count = old_count;
  m.new_count = new_count;
  std::vector<std::map<int, int>> votes(old_count), owners(new_count);
  for (auto [i, j] : matches) {
    const int o = before[i].line - 1;
    const int n = after[j].line - 1;
    if (o < 0 || o >= old_count || n < 0 || n >= new_count) inconsistent("token line outside the hunk");
    ++votes[o][n];
    ++owners[n][o];
  }
  m.majority_target.resize(old_count);
  for (int o = 0; o < old_count; ++o) m.majority_target[o] = argmax(votes[o]);

  std::vector<std::optional<int>> target = m.majority_target;
  for (auto [o, n] : anchors) {
    if (o < 0 || o >= old_count || n < 0 || n >= new_count) inconsistent("anchor outside the hunk");
    target[o] = n;
  }

  // Targets must be non-decreasing; equal targets absorb the lines between.
  int last_mapped = -1;
  for (int o = 0; o < old_count; ++o) {
    if (!target[o]) continue;
    if (last_mapped >= 0) {
      if (*target[o] < *target[last_mapped]) inconsistent("crossing line alignment at old line " + std::to_string(o + 1));
      if (*target[o] == *target[last_mapped])
        for (int k = last_mapped + 1; k < o; ++k) target[k] = target[o];
    }
    last_mapped = o;
  }

  for (int o = 0; o < old_count; ++o) {
    if (!target[o]) continue;
    if (!m.blocks.empty() && m.blocks.back().old_last == o - 1 && m.blocks.back().new_first == *target[o]) {
      m.blocks.back().old_last = o;
    } else {
      m.blocks.push_back({o, o, *target[o], *target[o]});
    }
  }

  // New lines that received tokens without being a majority target join the
  // block of the old line they took most tokens from.
  std::vector<int> block_index(old_count, -1);
  for (int b = 0; b < static_cast<int>(m.blocks.size()); ++b)
    for (int o = m.blocks[b].old_first; o <= m.blocks[b].old_last; ++o) block_index[o] = b;
  std::vector<bool> is_target(new_count, false);
  for (const auto& b : m.blocks) is_target[b.new_first] = true;
  for (int n = 0; n < new_count; ++n) {
    if (is_target[n]) continue;
    auto owner = argmax(owners[n]);
    if (!owner || block_index[*owner] < 0) continue;
    const int b = block_index[*owner];
    auto& blk = m.blocks[b];
    if (n >= blk.new_first && n <= blk.new_last) continue;
    if (n < blk.new_first && (b == 0 || n > m.blocks[b - 1].new_last)) blk.new_first = n;
    if (n > blk.new_last && (b + 1 == static_cast<int>(m.blocks.size()) || n < m.blocks[b + 1].new_first))
      blk.new_last = n;
  }

  std::vector<bool> covered(new_count, false);
  for (const auto& b : m.blocks)
    for (int n = b.new_first; n <= b.new_last; ++n) covered[n] = true;
  std::size_t next_block = 0;
  for (int n = 0; n < new_count;) {
    while (next_block < m.blocks.size() && m.blocks[next_block].new_last < n) ++next_block;
    if (covered[n]) {
      ++n;
      continue;
    }
    int end = n;
    while (end + 1 < new_count && !covered[end + 1]) ++end;
    const int gap = next_block == 0 ? 0 : m.blocks[next_block - 1].old_last + 1;
    if (!m.inserts.empty() && m.inserts.back().gap >= gap) inconsistent("two insertions claim one gap");
    m.inserts.push_back({gap, n, end});
    n = end + 1;
  }
  return m;
}

namespace {

struct LineTokens {
  std::vector<SyntaxToken> all;
  std::vector<std::pair<int, int>> range;  // per line [begin, end)

  LineTokens(std::span<const std::string> lines, Language lang) : all(tokenize(lines, lang)), range(lines.size()) {
    std::size_t t = 0;
    for (int l = 0; l < static_cast<int>(lines.size()); ++l) {
      const auto begin = t;
      while (t < all.size() && all[t].line - 1 == l) ++t;
      range[l] = {static_cast<int>(begin), static_cast<int>(t)};
    }
  }
  std::span<const SyntaxToken> line(int l) const {
    return std::span<const SyntaxToken>(all).subspan(range[l].first, range[l].second - range[l].first);
  }
  std::span<const SyntaxToken> lines(int first, int last_exclusive) const {
    if (first >= last_exclusive) return {};
    const int b = range[first].first;
    const int e = range[last_exclusive - 1].second;
    return std::span<const SyntaxToken>(all).subspan(b, e - b);
  }
};

// Upper bound on old*new line pairs for the head-aligned phase.
constexpr std::size_t kMaxHeadPairs = 300 * 300;

void head_align(const LineTokens& old_tok, const LineTokens& new_tok, int oa, int ob, int na, int nb,
                std::vector<LineAnchor>& out) {
  const int no = ob - oa, nn = nb - na;
  if (no <= 0 || nn <= 0 || static_cast<std::size_t>(no) * static_cast<std::size_t>(nn) > kMaxHeadPairs) return;
  std::vector<int> score(static_cast<std::size_t>(no) * nn, 0);
  for (int i = 0; i < no; ++i) {
    auto a = old_tok.line(oa + i);
    if (a.empty()) continue;
    for (int j = 0; j < nn; ++j) {
      auto b = new_tok.line(na + j);
      if (b.empty() || !a.front().same_element(b.front())) continue;
      score[i * nn + j] = 1 + static_cast<int>(lcs_match(a, b).size());
    }
  }
  std::vector<int> best(static_cast<std::size_t>(no + 1) * (nn + 1), 0);
  auto at = [&](int i, int j) -> int& { return best[i * (nn + 1) + j]; };
  for (int i = no - 1; i >= 0; --i)
    for (int j = nn - 1; j >= 0; --j) {
      int v = std::max(at(i + 1, j), at(i, j + 1));
      if (score[i * nn + j] > 0) v = std::max(v, score[i * nn + j] + at(i + 1, j + 1));
      at(i, j) = v;
    }
  int i = 0, j = 0;
  while (i < no && j < nn) {
    const int s = score[i * nn + j];
    if (s > 0 && at(i, j) == s + at(i + 1, j + 1)) {
      out.emplace_back(oa + i, na + j);
      ++i;
      ++j;
    } else if (at(i, j + 1) == at(i, j)) {
      ++j;
    } else {
      ++i;
    }
  }
}

void append_matches(const std::vector<MatchPair>& local, int a_off, int b_off, std::vector<MatchPair>& out) {
  for (auto [i, j] : local) out.emplace_back(i + a_off, j + b_off);
}

}  // namespace

LineMapping align_lines(std::span<const std::string> old_lines, std::span<const std::string> new_lines,
                        Language lang) {
  const LineTokens old_tok(old_lines, lang), new_tok(new_lines, lang);
  const int n_old = static_cast<int>(old_lines.size());
  const int n_new = static_cast<int>(new_lines.size());

  const auto identical = longest_common_subsequence(old_lines, new_lines);
  std::vector<LineAnchor> anchors;
  int po = 0, pn = 0;
  auto bounded = identical;
  bounded.emplace_back(n_old, n_new);
  for (auto [o, n] : bounded) {
    head_align(old_tok, new_tok, po, o, pn, n, anchors);
    if (o < n_old) anchors.emplace_back(o, n);
    po = o + 1;
    pn = n + 1;
  }

  std::vector<MatchPair> matches;
  po = 0;
  pn = 0;
  auto gap_matches = [&](int ob, int nb) {
    auto a = old_tok.lines(po, ob);
    auto b = new_tok.lines(pn, nb);
    if (!a.empty() && !b.empty()) {
      append_matches(lcs_match(a, b), static_cast<int>(a.data() - old_tok.all.data()),
                     static_cast<int>(b.data() - new_tok.all.data()), matches);
    }
  };
  for (auto [o, n] : anchors) {
    gap_matches(o, n);
    auto a = old_tok.line(o);
    auto b = new_tok.line(n);
    if (!a.empty() && !b.empty())
      append_matches(lcs_match(a, b), old_tok.range[o].first, new_tok.range[n].first, matches);
    po = o + 1;
    pn = n + 1;
  }
  gap_matches(n_old, n_new);
  return token2line_mapping(matches, old_tok.all, new_tok.all, n_old, n_new, anchors);
}

Labels convert_to_labels(const LineMapping& mapping, std::span<const std::string> old_lines,
                         std::span<const std::string> new_lines) {
  const int n = mapping.old_count;
  if (n != static_cast<int>(old_lines.size()) || mapping.new_count != static_cast<int>(new_lines.size()))
    inconsistent("mapping does not describe these lines");
  Labels out;
  out.inline_labels.assign(n, InlineLabel::Delete);
  out.inter_labels.assign(n + 1, InterLabel::Null);
  std::vector<int> block_id(n, -1);
  for (int b = 0; b < static_cast<int>(mapping.blocks.size()); ++b) {
    const auto& blk = mapping.blocks[b];
    if (blk.old_first > blk.old_last || blk.new_first > blk.new_last || blk.old_last >= n ||
        blk.new_last >= mapping.new_count)
      inconsistent("malformed block");
    const bool keep = blk.old_first == blk.old_last && blk.new_first == blk.new_last &&
                      old_lines[blk.old_first] == new_lines[blk.new_first];
    for (int o = blk.old_first; o <= blk.old_last; ++o) {
      if (block_id[o] >= 0) inconsistent("old line in two blocks");
      block_id[o] = b;
      out.inline_labels[o] = keep ? InlineLabel::Keep : InlineLabel::Replace;
    }
  }
  for (const auto& ins : mapping.inserts) {
    if (ins.gap < 0 || ins.gap > n || ins.new_first > ins.new_last) inconsistent("malformed insertion");
    out.inter_labels[ins.gap] = InterLabel::Insert;
  }
  for (int g = 1; g < n; ++g) {
    if (out.inter_labels[g] == InterLabel::Null && out.inline_labels[g - 1] == InlineLabel::Replace &&
        out.inline_labels[g] == InlineLabel::Replace && block_id[g - 1] != block_id[g])
      out.inter_labels[g] = InterLabel::BlockSplit;
  }
  return out;
}

int EnrichedHunk::semantic_kinds() const noexcept {
  const bool del = std::find(inline_labels.begin(), inline_labels.end(), InlineLabel::Delete) != inline_labels.end();
  const bool rep = std::find(inline_labels.begin(), inline_labels.end(), InlineLabel::Replace) != inline_labels.end();
  const bool ins = std::find(inter_labels.begin(), inter_labels.end(), InterLabel::Insert) != inter_labels.end();
  return int(del) + int(rep) + int(ins);
}

namespace {

// Maximal REPLACE runs not interrupted by BLOCK-SPLIT or INSERT gaps.
std::vector<std::pair<int, int>> replace_runs(std::span<const InlineLabel> inl, std::span<const InterLabel> inter) {
  std::vector<std::pair<int, int>> runs;
  for (int o = 0; o < static_cast<int>(inl.size()); ++o) {
    if (inl[o] != InlineLabel::Replace) continue;
    if (!runs.empty() && runs.back().second == o - 1 && inter[o] == InterLabel::Null) {
      runs.back().second = o;
    } else {
      runs.emplace_back(o, o);
    }
  }
  return runs;
}

[[noreturn]] void bad_encoding(const std::string& why) { throw Error(ErrorCode::MalformedEncoding, why); }

}  // namespace

void EnrichedHunk::validate() const {
  const auto n = hunk.old_lines.size();
  if (inline_labels.size() != n || inter_labels.size() != n + 1)
    inconsistent("length law violated: |inter| - 1 == |inline| == |old lines| does not hold");
  for (std::size_t g = 0; g <= n; ++g) {
    const bool has = insert_blocks.contains(static_cast<int>(g));
    if ((inter_labels[g] == InterLabel::Insert) != has) inconsistent("insert content disagrees with labels");
    if (has && insert_blocks.at(static_cast<int>(g)).empty()) inconsistent("empty insert block");
    if (inter_labels[g] == InterLabel::BlockSplit && (g == 0 || g == n)) inconsistent("block split at outer gap");
  }
  const auto runs = replace_runs(inline_labels, inter_labels);
  if (runs.size() != replace_blocks.size()) inconsistent("replace content disagrees with labels");
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (replace_blocks[r].old_first != runs[r].first || replace_blocks[r].old_last != runs[r].second ||
        replace_blocks[r].new_lines.empty())
      inconsistent("replace block misaligned");
  }
}

bool EnrichedHunk::same_encoding(const EnrichedHunk& other) const {
  return hunk.old_lines == other.hunk.old_lines && hunk.new_lines == other.hunk.new_lines &&
         inline_labels == other.inline_labels && inter_labels == other.inter_labels &&
         insert_blocks == other.insert_blocks && replace_blocks == other.replace_blocks;
}

EnrichedHunk enrich(const Hunk& hunk, Language lang) {
  EnrichedHunk e;
  e.hunk = hunk;
  const auto mapping = align_lines(hunk.old_lines, hunk.new_lines, lang);
  auto labels = convert_to_labels(mapping, hunk.old_lines, hunk.new_lines);
  e.inline_labels = std::move(labels.inline_labels);
  e.inter_labels = std::move(labels.inter_labels);
  for (const auto& ins : mapping.inserts)
    e.insert_blocks[ins.gap] = Lines(hunk.new_lines.begin() + ins.new_first, hunk.new_lines.begin() + ins.new_last + 1);
  for (const auto& blk : mapping.blocks) {
    if (e.inline_labels[blk.old_first] != InlineLabel::Replace) continue;
    e.replace_blocks.push_back({blk.old_first, blk.old_last,
                                Lines(hunk.new_lines.begin() + blk.new_first, hunk.new_lines.begin() + blk.new_last + 1)});
  }
  e.validate();
  return e;
}

Lines reconstruct(const EnrichedHunk& e) {
  Lines out;
  const auto& old = e.hunk.old_lines;
  std::size_t next_block = 0;
  for (std::size_t g = 0; g <= old.size(); ++g) {
    if (auto it = e.insert_blocks.find(static_cast<int>(g)); it != e.insert_blocks.end())
      out.insert(out.end(), it->second.begin(), it->second.end());
    if (g == old.size()) break;
    switch (e.inline_labels[g]) {
      case InlineLabel::Keep: out.push_back(old[g]); break;
      case InlineLabel::Delete: break;
      case InlineLabel::Replace:
        if (next_block < e.replace_blocks.size() && e.replace_blocks[next_block].old_first == static_cast<int>(g)) {
          const auto& nl = e.replace_blocks[next_block].new_lines;
          out.insert(out.end(), nl.begin(), nl.end());
          ++next_block;
        }
        break;
    }
  }
  return out;
}

namespace {

constexpr std::array<std::string_view, 10> kSentinelNames{"KEEP",   "REPLACE",     "DELETE",    "NULL", "INSERT",
                                                          "BLOCK-SPLIT", "POST-EDIT", "MASK", "INTER-MASK", "PRIOR"};
constexpr std::string_view kPostEdit = "<POST-EDIT>";

// At `pos` (a '<'), returns the length of `<` + backslashes + name + `>` if
// the text there is a (possibly escaped) sentinel, plus the backslash count.
std::optional<std::pair<std::size_t, std::size_t>> sentinel_at(std::string_view s, std::size_t pos) {
  std::size_t k = pos + 1;
  while (k < s.size() && s[k] == '\\') ++k;
  const std::size_t slashes = k - pos - 1;
  for (auto name : kSentinelNames) {
    if (s.substr(k, name.size()) == name && k + name.size() < s.size() && s[k + name.size()] == '>')
      return std::make_pair(k + name.size() + 1 - pos, slashes);
  }
  return std::nullopt;
}

std::string rewrite_sentinels(std::string_view code, int delta) {
  std::string out;
  out.reserve(code.size());
  for (std::size_t i = 0; i < code.size();) {
    if (code[i] == '<') {
      if (auto hit = sentinel_at(code, i); hit && (delta > 0 || hit->second > 0)) {
        const auto [len, slashes] = *hit;
        out += '<';
        out.append(slashes + delta, '\\');
        out.append(code.substr(i + 1 + slashes, len - 1 - slashes));
        i += len;
        continue;
      }
    }
    out += code[i++];
  }
  return out;
}

}  // namespace

std::string escape_sentinels(std::string_view code) { return rewrite_sentinels(code, +1); }
std::string unescape_sentinels(std::string_view code) { return rewrite_sentinels(code, -1); }

std::string render_labeled_code(std::span<const std::string> lines, std::span<const InlineLabel> inline_labels,
                                std::span<const InterLabel> inter_labels) {
  std::string out;
  for (std::size_t g = 0; g <= lines.size(); ++g) {
    out += tag(inter_labels[g]);
    out += '\n';
    if (g == lines.size()) break;
    out += tag(inline_labels[g]);
    out += escape_sentinels(lines[g]);
    out += '\n';
  }
  return out;
}

std::string render_enriched(const EnrichedHunk& e) {
  std::string out = render_labeled_code(e.hunk.old_lines, e.inline_labels, e.inter_labels);
  out += kPostEdit;
  out += '\n';
  auto section = [&](InterLabel or_inline_tag_is_insert, const Lines& content) {
    out += or_inline_tag_is_insert == InterLabel::Insert ? tag(InterLabel::Insert) : tag(InlineLabel::Replace);
    out += '\n';
    for (const auto& l : content) {
      out += '+';
      out += escape_sentinels(l);
      out += '\n';
    }
  };
  std::size_t next_block = 0;
  const auto n = e.hunk.old_lines.size();
  for (std::size_t g = 0; g <= n; ++g) {
    if (auto it = e.insert_blocks.find(static_cast<int>(g)); it != e.insert_blocks.end())
      section(InterLabel::Insert, it->second);
    if (g < n && next_block < e.replace_blocks.size() && e.replace_blocks[next_block].old_first == static_cast<int>(g))
      section(InterLabel::Null, e.replace_blocks[next_block++].new_lines);
  }
  return out;
}

EnrichedHunk parse_enriched(std::string_view text) {
  const Lines lines = split_lines(text);
  EnrichedHunk e;
  std::size_t i = 0;
  auto inter_at = [&](std::size_t k) -> std::optional<InterLabel> {
    if (k >= lines.size()) return std::nullopt;
    auto l = edit_label_from_tag(lines[k]);
    if (!l || lines[k].front() != '<') return std::nullopt;
    switch (*l) {
      case EditLabel::Null: return InterLabel::Null;
      case EditLabel::Insert: return InterLabel::Insert;
      case EditLabel::BlockSplit: return InterLabel::BlockSplit;
      default: return std::nullopt;
    }
  };
  auto first = inter_at(i);
  if (!first) bad_encoding("expected an inter-line label on line 1");
  e.inter_labels.push_back(*first);
  ++i;
  while (i < lines.size() && lines[i] != kPostEdit) {
    const std::string& l = lines[i];
    std::optional<InlineLabel> lab;
    std::size_t taglen = 0;
    for (InlineLabel cand : {InlineLabel::Keep, InlineLabel::Replace, InlineLabel::Delete}) {
      if (std::string_view(l).starts_with(tag(cand))) {
        lab = cand;
        taglen = tag(cand).size();
      }
    }
    if (!lab) bad_encoding("expected an inline label on line " + std::to_string(i + 1));
    e.inline_labels.push_back(*lab);
    e.hunk.old_lines.push_back(unescape_sentinels(std::string_view(l).substr(taglen)));
    ++i;
    auto inter = inter_at(i);
    if (!inter) bad_encoding("expected an inter-line label on line " + std::to_string(i + 1));
    e.inter_labels.push_back(*inter);
    ++i;
  }
  if (i >= lines.size()) bad_encoding("missing " + std::string(kPostEdit) + " section");
  ++i;
  std::vector<std::pair<bool, Lines>> sections;  // (is_insert, content)
  while (i < lines.size()) {
    const std::string& l = lines[i];
    if (l == tag(InterLabel::Insert) || l == tag(InlineLabel::Replace)) {
      sections.emplace_back(l == tag(InterLabel::Insert), Lines{});
    } else if (!l.empty() && l.front() == '+' && !sections.empty()) {
      sections.back().second.push_back(unescape_sentinels(std::string_view(l).substr(1)));
    } else {
      bad_encoding("unexpected line " + std::to_string(i + 1) + " in post-edit section");
    }
    ++i;
  }
  const auto runs = replace_runs(e.inline_labels, e.inter_labels);
  std::size_t s = 0, r = 0;
  const auto n = e.inline_labels.size();
  for (std::size_t g = 0; g <= n; ++g) {
    if (e.inter_labels[g] == InterLabel::Insert) {
      if (s >= sections.size() || !sections[s].first) bad_encoding("insert section missing");
      e.insert_blocks[static_cast<int>(g)] = std::move(sections[s++].second);
    }
    if (g < n && r < runs.size() && runs[r].first == static_cast<int>(g)) {
      if (s >= sections.size() || sections[s].first) bad_encoding("replace section missing");
      e.replace_blocks.push_back({runs[r].first, runs[r].second, std::move(sections[s++].second)});
      ++r;
    }
  }
  if (s != sections.size()) bad_encoding("unused post-edit sections");
  e.hunk.new_lines = reconstruct(e);
  e.hunk.old_span = {1, static_cast<int>(n)};
  e.hunk.new_span = {1, static_cast<int>(e.hunk.new_lines.size())};
  try {
    e.validate();
  } catch (const Error& err) {
    bad_encoding(err.what());
  }
  return e;
}

double multi_semantic_ratio(std::span<const EnrichedHunk> hunks) {
  if (hunks.empty()) throw Error(ErrorCode::EmptyCorpus, "no hunks");
  const auto multi = std::count_if(hunks.begin(), hunks.end(), [](const auto& h) { return h.semantic_kinds() >= 2; });
  return 100.0 * static_cast<double>(multi) / static_cast<double>(hunks.size());
}

double multi_semantic_ratio(std::span<const Hunk> hunks, Language lang) {
  if (hunks.empty()) throw Error(ErrorCode::EmptyCorpus, "no hunks");
  std::vector<EnrichedHunk> enriched;
  enriched.reserve(hunks.size());
  for (const auto& h : hunks) enriched.push_back(enrich(h, lang));
  return multi_semantic_ratio(enriched);
}

}  // namespace nextedit
