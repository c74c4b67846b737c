#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "nextedit/generator.hpp"
#include "../support/oracles.hpp"
#include "../support/golden_hunks.hpp"

using namespace nextedit;
using nextedit::testing::join_words;
using nextedit::testing::reference_bleu;

namespace {

GenerationQuery sampler_query(int line) {
  GenerationQuery q;
  q.window.file = "modules/sd_samplers_kdiffusion.py";
  q.window.lines = testing::sampler_window();
  q.window.span = {14, 14 + static_cast<int>(q.window.lines.size()) - 1};
  q.labels = testing::replace_line(q.window.lines.size(), line);
  q.priors = {testing::sampler_condition_edit()};
  return q;
}

}  // namespace

TEST_CASE("bleu4 matches hand arithmetic") {
  // p1..p4 = 4/5, 3/4, 2/3, 1/2; equal lengths
  CHECK(bleu4("a b c d e", "a b c d f") == doctest::Approx(100.0 * std::pow(0.2, 0.25)).epsilon(1e-12));
  CHECK(bleu4("the cat sat", "the cat sat on") ==
        doctest::Approx(100.0 * std::exp(1.0 - 4.0 / 3.0)).epsilon(1e-12));
  CHECK(bleu4("", "x y") == 0.0);
  CHECK(bleu4("x = 1", "x = 1") == 100.0);
}

TEST_CASE("bleu4 agrees with an independent implementation") {
  std::mt19937 rng(11);
  const std::vector<std::string> vocab{"a", "b", "c", "x", "=", "(", ")", "1"};
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> c(rng() % 9), r(1 + rng() % 9);
    for (auto& w : c) w = vocab[rng() % vocab.size()];
    for (auto& w : r) w = vocab[rng() % vocab.size()];
    CHECK(std::abs(bleu4(join_words(c), join_words(r)) - reference_bleu(c, r)) < 1e-9);
  }
  for (int t = 0; t < 100; ++t) {
    std::vector<std::string> x(1 + rng() % 12);
    for (auto& w : x) w = vocab[rng() % vocab.size()];
    CHECK(bleu4(join_words(x), join_words(x)) == doctest::Approx(100.0).epsilon(1e-12));
  }
}

TEST_CASE("template replay carries the condition rewrite to its clones") {
  TemplateReplayGenerator gen;
  auto h2 = gen.generate(sampler_query(6), 10);
  REQUIRE_FALSE(h2.empty());
  CHECK(h2[0].post_code == Lines{"        if 'n' in parameters:"});
  CHECK(h2[0].rank == 1);
  auto h3 = gen.generate(sampler_query(8), 10);
  REQUIRE_FALSE(h3.empty());
  CHECK(h3[0].post_code == Lines{"        if 'sigma_sched' in parameters:"});
  CHECK(bleu4(h3[0].post_code, Lines{"        if 'sigma_sched' in parameters:"}) == 100.0);

  const Edit e = candidate_edit(sampler_query(6), h2[0]);
  CHECK(e.line_start == 19);
  CHECK(e.code_before == Lines{"        if 'n' in inspect.signature(self.func).parameters:"});
}

TEST_CASE("template replay without a matching prior yields nothing") {
  TemplateReplayGenerator gen;
  auto q = sampler_query(7);  // an assignment, nothing like the prior's condition
  CHECK(gen.generate(q, 10).empty());
  q = sampler_query(6);
  q.priors.clear();
  CHECK(gen.generate(q, 10).empty());
}

TEST_CASE("pure deletions are generated from the labels alone") {
  TemplateReplayGenerator gen;
  auto q = sampler_query(6);
  q.labels.inline_labels[5] = InlineLabel::Delete;
  q.labels.inline_labels[6] = InlineLabel::Delete;
  auto c = gen.generate(q, 3);
  REQUIRE(c.size() == 1);
  CHECK(c[0].post_code.empty());
}

TEST_CASE("generation metrics") {
  const Lines gold{"x = 1"};
  std::vector<Candidate> cands{{{"x = 2"}, 0.9, 1}, {{"x = 1  "}, 0.5, 2}};
  auto s = evaluate_generation(cands, gold);
  CHECK(s.emr[1] == 0.0);
  CHECK(s.emr[3] == 100.0);
  CHECK(s.bleu[3] == 100.0);
  CHECK(s.bleu[1] <= s.bleu[3]);
  auto none = evaluate_generation({}, gold);
  for (int k : {1, 3, 5, 10}) {
    CHECK(none.emr[k] == 0.0);
    CHECK(none.bleu[k] == 0.0);
  }
}

TEST_CASE("external generator response parsing") {
  json resp = {{"candidates", {{{"post_code", "a\nb"}, {"score", 0.2}}, {{"post_code", {"c"}}, {"score", 0.7}}}}};
  auto c = ExternalGenerator::parse_response(resp, 5);
  REQUIRE(c.size() == 2);
  CHECK(c[0].post_code == Lines{"c"});
  CHECK(c[1].post_code == Lines{"a", "b"});
  CHECK(c[1].rank == 2);
  CHECK_THROWS_AS(ExternalGenerator::parse_response(json::object(), 5), Error);
  ExternalGenerator dead([](const json&) -> json { throw Error(ErrorCode::BackendUnavailable, "down"); });
  CHECK_THROWS_AS(dead.generate(sampler_query(6), 3), Error);
}
