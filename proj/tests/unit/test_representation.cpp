#include <random>
#include <set>

#include "doctest.h"
#include "nextedit/representation.hpp"
#include "../support/golden_hunks.hpp"

using namespace nextedit;

namespace {

std::string letters(const EnrichedHunk& e) {
  std::string s;
  for (auto l : e.inline_labels) s += letter(l);
  s += '|';
  for (auto l : e.inter_labels) s += letter(l);
  return s;
}

}  // namespace

TEST_CASE("mixed hunk gets delete, replace, insert and block split") {
  const auto e = enrich(testing::extract_tags_hunk(), Language::Python);
  CHECK(letters(e) == "KKDRRRKK|NNNNIBINN");
  CHECK(e.insert_blocks.at(4) == Lines{"        k1='Tags.member.", "        k2='Tags.member."});
  CHECK(e.insert_blocks.at(6).size() == 2);
  REQUIRE(e.replace_blocks.size() == 3);
  CHECK(e.replace_blocks[0].old_first == 3);
  CHECK(e.replace_blocks[2].new_lines == Lines{"        value = req_data.get(k2)"});
  CHECK(reconstruct(e) == e.hunk.new_lines);
  CHECK(e.semantic_kinds() == 3);
}

TEST_CASE("inserted lines land before the rewritten condition") {
  const auto e = enrich(testing::sampler_hunk(), Language::Python);
  CHECK(letters(e) == "KRK|NINN");
  CHECK(e.insert_blocks.at(1).size() == 2);
  CHECK(e.replace_blocks[0].new_lines == Lines{"        if 'sigma_min' in parameters:"});
  CHECK(reconstruct(e) == e.hunk.new_lines);
}

TEST_CASE("render and parse round trip") {
  for (const auto& h : {testing::extract_tags_hunk(), testing::sampler_hunk()}) {
    const auto e = enrich(h, Language::Python);
    const auto text = render_enriched(e);
    const auto back = parse_enriched(text);
    CHECK(back.inline_labels == e.inline_labels);
    CHECK(back.inter_labels == e.inter_labels);
    CHECK(back.hunk.old_lines == e.hunk.old_lines);
    CHECK(back.hunk.new_lines == e.hunk.new_lines);
  }
}

TEST_CASE("sentinels inside code survive the encoding") {
  Hunk h;
  h.file = "a.py";
  h.old_lines = {"x = '<KEEP>'", "y = '<\\REPLACE>'"};
  h.new_lines = {"x = '<INSERT>'", "y = '<\\REPLACE>'", "<POST-EDIT>"};
  h.old_span = {1, 2};
  h.new_span = {1, 3};
  const auto e = enrich(h, Language::Python);
  const auto text = render_enriched(e);
  CHECK(text.find("'<\\KEEP>'") != std::string::npos);
  CHECK(text.find("'<\\\\REPLACE>'") != std::string::npos);
  const auto back = parse_enriched(text);
  CHECK(back.hunk.old_lines == h.old_lines);
  CHECK(back.hunk.new_lines == h.new_lines);
  CHECK(unescape_sentinels(escape_sentinels("<\\\\MASK> <NULL>")) == "<\\\\MASK> <NULL>");
}

TEST_CASE("pure insertion and pure deletion") {
  Hunk ins;
  ins.file = "a.py";
  ins.new_lines = {"a = 1", "b = 2"};
  ins.old_span = {3, 2};
  ins.new_span = {3, 4};
  auto e = enrich(ins, Language::Python);
  CHECK(letters(e) == "|I");
  CHECK(reconstruct(e) == ins.new_lines);

  Hunk del;
  del.file = "a.py";
  del.old_lines = {"a = 1", "b = 2"};
  del.old_span = {3, 4};
  del.new_span = {3, 2};
  e = enrich(del, Language::Python);
  CHECK(letters(e) == "DD|NNN");
  CHECK(reconstruct(e).empty());
}

TEST_CASE("malformed encodings are rejected") {
  CHECK_THROWS_AS(parse_enriched("<KEEP>x\n"), Error);
  CHECK_THROWS_AS(parse_enriched("<NULL>\n<KEEP>x\n"), Error);
  CHECK_THROWS_AS(parse_enriched("<NULL>\n<REPLACE>x\n<NULL>\n<POST-EDIT>\n"), Error);
  try {
    parse_enriched("<NULL>\n<KEEP>x\n<INSERT>\n<POST-EDIT>\n");
    FAIL("expected MalformedEncoding");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::MalformedEncoding);
  }
}

TEST_CASE("crossing token alignment is inconsistent") {
  const Lines old_lines{"a", "b"};
  const Lines new_lines{"b", "a"};
  const auto before = tokenize(old_lines, Language::Python);
  const auto after = tokenize(new_lines, Language::Python);
  const std::vector<MatchPair> crossing{{0, 1}, {1, 0}};
  CHECK_THROWS_AS(token2line_mapping(crossing, before, after, 2, 2), Error);
}

TEST_CASE("random hunks: length law, reconstruction, block split placement") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> pool{"x = 1",       "y = x + 2", "return y", "if x:",     "print(x)",
                                      "for i in r:", "z = f(x)",  "pass",     "x = g(y)", "def f(a):"};
  for (int iter = 0; iter < 1000; ++iter) {
    Hunk h;
    h.file = "r.py";
    const int no = static_cast<int>(rng() % 7), nn = static_cast<int>(rng() % 7);
    for (int i = 0; i < no; ++i) h.old_lines.push_back(pool[rng() % pool.size()]);
    for (int i = 0; i < nn; ++i) h.new_lines.push_back(pool[rng() % pool.size()]);
    if (h.old_lines.empty() && h.new_lines.empty()) continue;
    h.old_span = {1, no};
    h.new_span = {1, nn};
    const auto e = enrich(h, Language::Python);
    REQUIRE(e.inter_labels.size() == e.inline_labels.size() + 1);
    REQUIRE(reconstruct(e) == h.new_lines);
    for (std::size_t g = 0; g < e.inter_labels.size(); ++g) {
      if (e.inter_labels[g] != InterLabel::BlockSplit) continue;
      REQUIRE(g > 0);
      REQUIRE(g < e.inline_labels.size());
      REQUIRE(e.inline_labels[g - 1] == InlineLabel::Replace);
      REQUIRE(e.inline_labels[g] == InlineLabel::Replace);
    }
    const auto back = parse_enriched(render_enriched(e));
    REQUIRE(back.hunk.new_lines == h.new_lines);
  }
}

TEST_CASE("multi-semantic ratio counts hunks with two or more edit kinds") {
  Hunk del;
  del.file = "a.py";
  del.old_lines = {"a = 1"};
  del.old_span = {1, 1};
  del.new_span = {1, 0};
  const std::vector<Hunk> hunks{testing::extract_tags_hunk(), testing::sampler_hunk(), del, del};
  CHECK(multi_semantic_ratio(hunks, Language::Python) == doctest::Approx(50.0));
  CHECK_THROWS_AS(multi_semantic_ratio(std::span<const Hunk>{}, Language::Python), Error);
}
