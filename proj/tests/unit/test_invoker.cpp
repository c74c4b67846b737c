#include "doctest.h"
#include "nextedit/invoker.hpp"
#include "../support/fixtures.hpp"
#include "../support/golden_hunks.hpp"

using namespace nextedit;
namespace t = nextedit::testing;

namespace {

Edit line_edit(std::string file, int line, std::string before, std::string after) {
  Edit e;
  e.file = std::move(file);
  e.line_start = e.line_end = line;
  e.code_before = {std::move(before)};
  e.code_after = {std::move(after)};
  return e;
}

std::vector<InvokerSample> suite_samples(const std::filesystem::path& dir, ToolServices& tools, unsigned seed) {
  const auto records = mine_commits(dir, Language::Python);
  InvokerBenchConfig cfg;
  cfg.seed = seed;
  return build_invoker_benchmark(
      records, [&](const CommitRecord& r) { return checkout_project(dir, r.parent_id, Language::Python); }, tools, cfg);
}

}  // namespace

TEST_CASE("rename shape detection") {
  auto r = detect_rename(line_edit("a.py", 3, "    total = count + 1", "    total = amount + 1"), Language::Python);
  REQUIRE(r);
  CHECK(r->old_name == "count");
  CHECK(r->new_name == "amount");
  CHECK_FALSE(r->function);
  CHECK(r->before.column == 12);

  auto f = detect_rename(line_edit("a.py", 1, "def load(path):", "def read(path):"), Language::Python);
  REQUIRE(f);
  CHECK(f->function);

  // Two different substitutions, or a changed token count, are not renames.
  CHECK_FALSE(detect_rename(line_edit("a.py", 1, "x = a + b", "x = c + d"), Language::Python));
  CHECK_FALSE(detect_rename(line_edit("a.py", 1, "x = a", "x = a + 1"), Language::Python));
}

TEST_CASE("encoded input keeps the latest edit and respects the budget") {
  const Edit last = line_edit("a.py", 1, "a = 1", "a = 2");
  std::vector<Edit> priors;
  for (int i = 0; i < 50; ++i) priors.push_back(line_edit("a.py", 10 + i, "value = compute(x, y, z)", "value = compute(x, y)"));
  const auto tiny = encode_input(last, priors, 1);
  CHECK(tiny.find("<BEFORE>a = 1</BEFORE><AFTER>a = 2</AFTER>") == 0);
  CHECK(tiny.find("compute") == std::string::npos);
  const auto some = encode_input(last, priors, 64);
  const auto all = encode_input(last, priors, 1 << 20);
  CHECK(some.size() > tiny.size());
  CHECK(all.size() > some.size());
}

TEST_CASE("heuristic classes on the motivating edits") {
  HeuristicInvoker go({}, Language::Go);
  const Edit h1 = line_edit("executor/window.go", 9, "func renewWithCapacity(chk *Chunk,cap int) *Chunk {",
                            "func renewWithCapacity(chk *Chunk,cap,maxChunkSize int) *Chunk {");
  auto d = go.classify(h1, {}, {});
  CHECK(d.fires(CompositionType::DefUse));
  CHECK_FALSE(d.fires(CompositionType::VarRename));
  CHECK_FALSE(d.fires(CompositionType::FuncRename));

  // cap -> maxChunkSize looks like a variable rename on its own.
  const Edit h2 = line_edit("executor/window.go", 12, "\tnewChk.requiredRows = cap", "\tnewChk.requiredRows = maxChunkSize");
  d = go.classify(h2, std::vector<Edit>{h1}, {});
  CHECK(d.fires(CompositionType::VarRename));
  REQUIRE(d.rename);
  CHECK(d.rename->old_name == "cap");

  // A no-op edit fires nothing.
  d = go.classify(line_edit("x.go", 1, "a := 1", "a := 1"), {}, {});
  CHECK(d.invoked.empty());
  for (auto c : kInvokerClasses) CHECK(d.scores.at(c) == 0.0);
}

TEST_CASE("usage change guard drops the rename of a parameter") {
  // After H1 widened the signature, H2 replaces one use of cap. Renaming cap
  // everywhere would rewrite the signature edited by H1, so nothing is kept.
  Project p(Language::Go);
  p.set_file("w.go",
             "package w\n"
             "func renew(chk int,cap,maxChunkSize int) int {\n"
             "\tn := cap\n"
             "\tr := maxChunkSize\n"
             "\treturn n + r\n"
             "}\n");
  const Edit h1 = line_edit("w.go", 2, "func renew(chk int,cap int) int {", "func renew(chk int,cap,maxChunkSize int) int {");
  const Edit h2 = line_edit("w.go", 4, "\tr := cap", "\tr := maxChunkSize");
  HeuristicInvoker go({}, Language::Go);
  const std::vector<Edit> priors{h1};
  InvokerContext ctx;
  ctx.project = &p;
  const auto d = go.classify(h2, priors, ctx);
  REQUIRE(d.fires(CompositionType::VarRename));
  LexicalToolServices tools;
  auto raw = fire_services(d, tools, p, h2, priors);
  CHECK_FALSE(raw.empty());
  const auto kept = confirm_invocation(d, raw, p, h2, priors);
  for (const auto& k : kept) CHECK(k.source != ToolService::Rename);
}

TEST_CASE("a genuine rename yields every other occurrence") {
  Project p;
  p.set_file("m.py",
             "def f(items):\n"
             "    total = len(items)\n"
             "    print(limit)\n"
             "    if limit > 3:\n"
             "        print(limit)\n"
             "    head = items[:limit]\n"
             "    return head, limit\n");
  // The user renamed `limit` to `total` on line 2 only.
  Project before = p;
  before.set_file("m.py", [&] {
    auto f = p.file("m.py");
    f.lines[1] = "    limit = len(items)";
    return f;
  }());
  const Edit e = line_edit("m.py", 2, "    limit = len(items)", "    total = len(items)");
  HeuristicInvoker py;
  InvokerContext ctx;
  ctx.project = &p;
  const auto d = py.classify(e, {}, ctx);
  REQUIRE(d.fires(CompositionType::VarRename));
  LexicalToolServices tools;
  auto kept = confirm_invocation(d, fire_services(d, tools, p, e, {}), p, e, {});
  std::set<int> lines;
  for (const auto& k : kept) {
    CHECK(k.source == ToolService::Rename);
    CHECK(k.confidence == 1.0);
    REQUIRE(k.replacement);
    CHECK(k.replacement->front().find("limit") == std::string::npos);
    lines.insert(k.span.start);
  }
  CHECK(lines == std::set<int>{3, 4, 5, 6, 7});
}

TEST_CASE("metrics: perfect predictions and the blind baseline") {
  using C = CompositionType;
  std::vector<std::set<C>> gold{{C::VarRename}, {C::DefUse}, {}, {C::Clone}};
  auto m = score_predictions(gold, gold);
  for (auto c : kInvokerClasses) {
    if (m.per_class[c].positives == 0) continue;
    CHECK(m.per_class[c].precision == 100.0);
    CHECK(m.per_class[c].recall == 100.0);
  }
  std::vector<std::set<C>> all(4, std::set<C>(kInvokerClasses.begin(), kInvokerClasses.end()));
  m = score_predictions(all, gold);
  CHECK(m.per_class[C::VarRename].recall == 100.0);
  CHECK(m.per_class[C::VarRename].precision == doctest::Approx(25.0));
  CHECK(m.per_class[C::FuncRename].precision == 0.0);
}

TEST_CASE("benchmark suite: heuristic rename recall and blind baseline") {
  LexicalToolServices tools;
  const auto dir = t::make_repo(t::scratch_dir("invoker"), t::composition_commits(t::mixed_kinds(24), 7));
  const auto samples = suite_samples(dir, tools, 7);
  REQUIRE(samples.size() == 24);
  for (const auto& s : samples) CHECK(s.labels.size() >= 1);
  CHECK(json(samples).dump() == json(suite_samples(dir, tools, 7)).dump());
  t::drop_scratch(dir);

  HeuristicInvoker heuristic;
  const auto h = evaluate_invoker(samples, heuristic);
  for (auto c : {CompositionType::VarRename, CompositionType::FuncRename}) {
    CHECK(h.per_class.at(c).recall == 100.0);
    CHECK(h.per_class.at(c).precision >= 90.0);
  }
  BlindInvoker blind;
  const auto b = evaluate_invoker(samples, blind);
  for (auto c : kInvokerClasses) {
    const auto& cm = b.per_class.at(c);
    if (cm.positives == 0) continue;
    CHECK(cm.recall == 100.0);
    CHECK(cm.precision == doctest::Approx(100.0 * static_cast<double>(cm.positives) / samples.size()));
  }
}
