#include "doctest.h"
#include "nextedit/simulation.hpp"
#include "../support/fixtures.hpp"

using namespace nextedit;
namespace t = nextedit::testing;

namespace {

struct Suite {
  std::filesystem::path dir;
  std::vector<CommitRecord> records;
  ~Suite() { t::drop_scratch(dir); }
};

const Suite& sim_suite() {
  static Suite s = [] {
    Suite out;
    out.dir = t::make_repo(t::scratch_dir("simsuite"), t::composition_commits(t::mixed_kinds(20), 11));
    out.records = mine_commits(out.dir, Language::Python);
    return out;
  }();
  return s;
}

SimReport run(const Engine& engine, std::uint64_t seed) {
  const auto& s = sim_suite();
  SimConfig cfg;
  cfg.seed = seed;
  std::vector<CommitReport> reports;
  for (const auto& r : s.records) reports.push_back(simulate_commit(s.dir, r.commit_id, Language::Python, engine, cfg));
  return aggregate(std::move(reports), seed);
}

void check_invariants(const SimReport& r) {
  auto check = [](const std::map<int, double>& mr, const std::map<int, double>& acc) {
    CHECK(mr.at(1) <= mr.at(3));
    CHECK(mr.at(3) <= mr.at(5));
    CHECK(acc.at(1) <= acc.at(3));
    CHECK(acc.at(3) <= acc.at(5));
    for (int k : {1, 3, 5}) CHECK(acc.at(k) <= mr.at(k));
  };
  check(r.match_rate, r.acceptance);
  for (const auto& c : r.commits) {
    check(c.match_rate, c.acceptance);
    CHECK_MESSAGE(c.final_tree_matches, c.commit_id);
    if (c.bands.steps) CHECK(c.bands.exact + c.bands.high + c.bands.low == doctest::Approx(1.0));
  }
}

}  // namespace

TEST_CASE("simulation over the fixture suite keeps its invariants") {
  REQUIRE(sim_suite().records.size() == 20);
  HeuristicInvoker invoker;
  LexicalToolServices tools;
  CloneBaselineLocator locator;
  auto generator = make_generator("template");
  const Engine engine{&invoker, &tools, &locator, generator.get()};
  const auto a = run(engine, 3);
  check_invariants(a);
  CHECK(a.match_rate.at(1) > 50.0);
  CHECK(a.acceptance.at(1) > 0.0);

  const auto b = run(engine, 3);
  CHECK(report_json(a).dump() == report_json(b).dump());
  CHECK(report_json(a, true).contains("aggregate"));
  CHECK_FALSE(report_json(a)["aggregate"].contains("mean_latency_s"));
  CHECK(report_json(a, true)["aggregate"].contains("mean_latency_s"));
}

TEST_CASE("a clone detector alone ranks everything first") {
  CloneBaselineLocator locator;
  const Engine engine{nullptr, nullptr, &locator, nullptr};
  const auto r = run(engine, 5);
  check_invariants(r);
  CHECK(r.match_rate.at(1) == r.match_rate.at(3));
  CHECK(r.match_rate.at(3) == r.match_rate.at(5));
  CHECK(r.acceptance.at(5) == 0.0);  // nothing generates content
}

TEST_CASE("aggregation is a micro average") {
  auto commit = [](int steps, int matched) {
    CommitReport c;
    for (int i = 0; i < steps; ++i) {
      StepRecord s;
      s.index = i + 1;
      for (int k : {1, 3, 5}) s.matched[k] = s.accepted[k] = i < matched;
      if (i < matched) s.best_bleu = 100.0;
      c.steps.push_back(s);
    }
    c.match_rate[1] = 0;
    return c;
  };
  const auto r = aggregate({commit(4, 3), commit(6, 0)}, 0);
  CHECK(r.steps == 10);
  CHECK(r.match_rate.at(1) == doctest::Approx(30.0));
  CHECK(r.acceptance.at(5) == doctest::Approx(30.0));
  CHECK(r.bands.exact == doctest::Approx(1.0));
  CHECK_THROWS_AS(aggregate({}, 0), Error);
}

TEST_CASE("steps that all match with exact content accept everything") {
  const auto dir = t::make_repo(t::scratch_dir("sampler-sim"), t::sampler_commits());
  HeuristicInvoker invoker;
  LexicalToolServices tools;
  auto generator = make_generator("template");
  const Engine engine{&invoker, &tools, nullptr, generator.get()};
  std::vector<json> trace;
  const auto report = simulate_commit(dir, t::head_commit(dir), Language::Python, engine, {},
                                      [&](const json& j) { trace.push_back(j); });
  t::drop_scratch(dir);
  REQUIRE(report.steps.size() == 2);
  CHECK(report.final_tree_matches);
  CHECK(report.match_rate.at(1) == 100.0);
  CHECK(report.acceptance.at(1) == 100.0);
  CHECK(report.bands.exact == 1.0);
  REQUIRE(trace.size() == 2);
  CHECK(trace[0].contains("latency_s"));
  CHECK(trace[0]["recommendations"][0]["rank"] == 1);
}
