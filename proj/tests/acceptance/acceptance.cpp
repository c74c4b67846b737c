// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any
// criterion fails.
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "nextedit/dataset.hpp"
#include "nextedit/simulation.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "../support/golden_hunks.hpp"

using namespace nextedit;
namespace t = nextedit::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

std::string letters(const EnrichedHunk& e) {
  std::string s;
  for (auto l : e.inline_labels) s += letter(l);
  s += '|';
  for (auto l : e.inter_labels) s += letter(l);
  return s;
}

// Three repositories mined once, shared by the corpus-level checks.
struct Corpus {
  std::vector<CommitRecord> records;
  std::size_t repos = 0;
  double seconds = 0;
};

const Corpus& corpus() {
  static Corpus c = [] {
    Corpus out;
    const auto start = std::chrono::steady_clock::now();
    unsigned seed = 101;
    for (auto lang : {Language::Python, Language::Go, Language::JavaScript}) {
      const auto dir = t::make_repo(t::scratch_dir(std::string(to_string(lang)) + "-mined"), t::random_commits(lang, seed++, 120, 4));
      MineFilters loose;
      loose.min_hunks = 1;
      for (auto& r : mine_commits(dir, lang, loose)) out.records.push_back(std::move(r));
      ++out.repos;
      t::drop_scratch(dir);
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }();
  return c;
}

Outcome length_law() {
  const auto start = std::chrono::steady_clock::now();
  const auto& c = corpus();
  std::size_t hunks = 0, violations = 0;
  for (const auto& r : c.records) {
    for (const auto& h : r.hunks) {
      ++hunks;
      const auto e = enrich(h, r.language);
      violations += e.inter_labels.size() != e.inline_labels.size() + 1 || e.inline_labels.size() != h.old_lines.size();
    }
  }
  const double secs = c.seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {hunks >= 1000 && c.repos >= 3 && violations == 0 && secs < 60.0,
          std::to_string(hunks) + " hunks from " + std::to_string(c.repos) + " repos, " + std::to_string(violations) +
              " violations, " + fmt(secs) + " s"};
}

Outcome lossless() {
  std::size_t hunks = 0, bad = 0;
  for (const auto& r : corpus().records) {
    for (const auto& h : r.hunks) {
      ++hunks;
      const auto e = enrich(h, r.language);
      bad += reconstruct(e) != h.new_lines || parse_enriched(render_enriched(e)).hunk.new_lines != h.new_lines;
    }
  }
  return {hunks > 0 && bad == 0, std::to_string(hunks - bad) + "/" + std::to_string(hunks) + " reconstructed"};
}

Outcome golden() {
  const auto got = letters(enrich(t::extract_tags_hunk(), Language::Python));
  return {got == "KKDRRRKK|NNNNIBINN", got};
}

Outcome reformulation() {
  const auto dir = t::make_repo(t::scratch_dir("sampler"), t::sampler_commits());
  const auto record = load_commit(dir, t::head_commit(dir), Language::Python);
  t::drop_scratch(dir);
  const auto e = enrich(record.hunks.at(0), Language::Python);
  std::size_t replaced = 0;
  for (auto l : e.inline_labels) replaced += l == InlineLabel::Replace;
  bool two_line_insert = false;
  for (const auto& [gap, lines] : e.insert_blocks) two_line_insert = two_line_insert || lines.size() == 2;
  const bool single = e.replace_blocks.size() == 1 && e.replace_blocks[0].new_lines.size() == 1;
  return {replaced == 1 && e.insert_blocks.size() == 1 && two_line_insert && single && reconstruct(e) == e.hunk.new_lines,
          letters(e) + ", insert of " + std::to_string(e.insert_blocks.empty() ? 0 : e.insert_blocks.begin()->second.size()) +
              " lines"};
}

Outcome lcs_oracle() {
  std::mt19937 rng(3);
  const std::vector<std::string> alphabet{"a", "b", "c", "(", ")", "x"};
  int agree = 0;
  for (int round = 0; round < 500; ++round) {
    std::vector<std::string> a(rng() % 13), b(rng() % 13);
    for (auto& s : a) s = alphabet[rng() % alphabet.size()];
    for (auto& s : b) s = alphabet[rng() % alphabet.size()];
    auto toks = [](const std::vector<std::string>& w) {
      std::vector<SyntaxToken> out;
      for (const auto& s : w) out.push_back({TokenKind::Identifier, s, 1, 0});
      return out;
    };
    agree += lcs_match(toks(a), toks(b)).size() == t::brute_lcs(a, b);
  }
  return {agree == 500, std::to_string(agree) + "/500 exact"};
}

Outcome semantic_ratio() {
  std::vector<Hunk> hunks;
  for (int i = 0; i < 100; ++i) {
    Hunk h;
    h.file = "m.py";
    const std::string v = "value_" + std::to_string(i);
    if (i % 10 < 7) {
      h.old_lines = {"    " + v + " = compute(" + std::to_string(i) + ")"};
      h.new_lines = {"    " + v + " = compute(" + std::to_string(i + 1) + ")"};
    } else {
      h.old_lines = {"    if " + v + " > limit:"};
      h.new_lines = {"    bound = limit * 2", "    if " + v + " > bound:"};
    }
    h.old_span = {10, 10};
    h.new_span = {10, 9 + static_cast<int>(h.new_lines.size())};
    hunks.push_back(std::move(h));
  }
  const double r = multi_semantic_ratio(hunks, Language::Python);
  return {r == 30.0, fmt(r) + "%"};
}

Outcome bleu_oracle() {
  std::mt19937 rng(11);
  const std::vector<std::string> vocab{"a", "b", "c", "x", "=", "(", ")", "1"};
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> c(rng() % 9), r(1 + rng() % 9);
    for (auto& w : c) w = vocab[rng() % vocab.size()];
    for (auto& w : r) w = vocab[rng() % vocab.size()];
    worst = std::max(worst, std::abs(bleu4(t::join_words(c), t::join_words(r)) - t::reference_bleu(c, r)));
  }
  int identical = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> x(1 + rng() % 12);
    for (auto& w : x) w = vocab[rng() % vocab.size()];
    identical += std::abs(bleu4(t::join_words(x), t::join_words(x)) - 100.0) < 1e-9;
  }
  return {worst < 1e-9 && identical == 100,
          "max deviation " + fmt(worst) + ", " + std::to_string(identical) + "/100 self-scores at 100"};
}

Outcome invoker_suite() {
  const auto dir = t::make_repo(t::scratch_dir("invoker50"), t::composition_commits(t::mixed_kinds(50), 23));
  const auto server_root = t::scratch_dir("invoker50-server");
  auto tools = make_tool_services(Language::Python, server_root);
  const auto records = mine_commits(dir, Language::Python);
  auto build = [&] {
    InvokerBenchConfig cfg;
    cfg.seed = 23;
    return build_invoker_benchmark(
        records, [&](const CommitRecord& r) { return checkout_project(dir, r.parent_id, Language::Python); }, *tools, cfg);
  };
  const auto samples = build();
  const bool deterministic = json(samples).dump() == json(build()).dump();
  const std::string tool_name = tools->name();
  tools.reset();
  t::drop_scratch(dir);
  t::drop_scratch(server_root);

  HeuristicInvoker heuristic;
  BlindInvoker blind;
  const auto h = evaluate_invoker(samples, heuristic);
  const auto b = evaluate_invoker(samples, blind);
  bool ok = deterministic && samples.size() == 50;
  std::string detail = std::to_string(samples.size()) + " samples via " + tool_name + (deterministic ? "" : ", NOT deterministic");
  for (auto c : {CompositionType::VarRename, CompositionType::FuncRename}) {
    const auto& m = h.per_class.at(c);
    ok = ok && m.positives > 0 && m.recall == 100.0 && m.precision >= 90.0;
    detail += "; " + std::string(to_string(c)) + " R=" + fmt(m.recall) + " P=" + fmt(m.precision);
  }
  for (auto c : kInvokerClasses) {
    const auto& m = b.per_class.at(c);
    if (m.positives == 0) continue;
    const double rate = 100.0 * static_cast<double>(m.positives) / static_cast<double>(samples.size());
    ok = ok && m.recall == 100.0 && std::abs(m.precision - rate) <= 1.0;
  }
  return {ok, detail + "; blind baseline checked"};
}

Outcome lsp_counts() {
  struct Case {
    Language lang;
    std::string file, text;
    Position variable, function;
  };
  // `limit` occurs 5 times; `scale` has 4 call sites.
  const std::vector<Case> cases{
      {Language::Python, "core.py",
       "def scale(value):\n    return value * 2\n\ndef total(items):\n    limit = len(items)\n    if limit > 3:\n"
       "        print(limit)\n    head = items[:limit]\n    return scale(limit) + len(head)\n\n"
       "def twice(x):\n    return scale(scale(scale(x)))\n",
       {5, 4}, {1, 4}},
      {Language::TypeScript, "core.ts",
       "export function scale(value: number): number {\n  return value * 2;\n}\n\n"
       "export function total(items: number[]): number {\n  const limit = items.length;\n  if (limit > 3) {\n"
       "    console.log(limit);\n  }\n  const head = items.slice(0, limit);\n  return scale(limit) + head.length;\n}\n\n"
       "export function twice(x: number): number {\n  return scale(scale(scale(x)));\n}\n",
       {6, 8}, {1, 16}},
  };
  bool ok = true;
  int servers = 0;
  std::string detail;
  for (const auto& c : cases) {
    const auto root = t::scratch_dir(std::string(to_string(c.lang)) + "-lsp");
    const auto config = lsp::default_server_config(c.lang, root);
    if (!config) {
      detail += std::string(to_string(c.lang)) + ": no server; ";
      t::drop_scratch(root);
      continue;
    }
    ++servers;
    auto services = LspToolServices::start(*config);
    Project p(c.lang);
    p.set_file(c.file, c.text);
    services->sync(p);
    const auto renamed = services->rename(c.file, c.variable, "bound");
    bool certain = true;
    for (const auto& r : renamed) certain = certain && r.confidence == 1.0;
    const auto refs = services->references(c.file, c.function);
    ok = ok && renamed.size() == 5 && certain && refs.size() == 5;
    detail += config->command.front() + ": rename " + std::to_string(renamed.size()) + "/5, references " +
              std::to_string(refs.size()) + "/5; ";
    services.reset();
    t::drop_scratch(root);
  }
  if (detail.ends_with("; ")) detail.resize(detail.size() - 2);
  return {ok && servers > 0, detail};
}

Outcome simulation_invariants() {
  const auto dir = t::make_repo(t::scratch_dir("sim20"), t::composition_commits(t::mixed_kinds(20), 11));
  const auto records = mine_commits(dir, Language::Python);
  auto run = [&](const Engine& engine, std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    std::vector<CommitReport> reports;
    for (const auto& r : records) reports.push_back(simulate_commit(dir, r.commit_id, Language::Python, engine, cfg));
    return aggregate(std::move(reports), seed);
  };
  auto ordered = [](const std::map<int, double>& mr, const std::map<int, double>& acc) {
    bool ok = mr.at(1) <= mr.at(3) && mr.at(3) <= mr.at(5) && acc.at(1) <= acc.at(3) && acc.at(3) <= acc.at(5);
    for (int k : {1, 3, 5}) ok = ok && acc.at(k) <= mr.at(k);
    return ok;
  };
  HeuristicInvoker invoker;
  LexicalToolServices tools;
  CloneBaselineLocator locator;
  auto generator = make_generator("template");
  const Engine full{&invoker, &tools, &locator, generator.get()};
  const Engine ccd{nullptr, nullptr, &locator, nullptr};

  bool ok = records.size() == 20;
  std::string detail;
  for (std::uint64_t seed : {1u, 2u}) {
    const auto a = run(full, seed);
    const auto b = run(full, seed);
    ok = ok && ordered(a.match_rate, a.acceptance) && report_json(a).dump() == report_json(b).dump();
    for (const auto& c : a.commits) ok = ok && c.final_tree_matches && ordered(c.match_rate, c.acceptance);
    if (seed == 1) detail = "MR@1/3/5 " + fmt(a.match_rate.at(1)) + "/" + fmt(a.match_rate.at(3)) + "/" + fmt(a.match_rate.at(5));
  }
  const auto c = run(ccd, 1);
  const bool flat = c.match_rate.at(1) == c.match_rate.at(3) && c.match_rate.at(3) == c.match_rate.at(5);
  t::drop_scratch(dir);
  return {ok && flat, detail + ", clone-only MR@1=" + fmt(c.match_rate.at(1)) + " MR@5=" + fmt(c.match_rate.at(5))};
}

Outcome motivating() {
  std::string detail;
  bool ok = true;
  {
    const auto dir = t::make_repo(t::scratch_dir("chunk-window"), t::chunk_window_commits());
    const auto record = load_commit(dir, t::head_commit(dir), Language::Go);
    const auto pre = checkout_project(dir, record.parent_id, Language::Go);
    t::drop_scratch(dir);
    EditSession session;
    const Edit h1 = record.hunks.at(0).to_edit();
    session.append(h1);
    HeuristicInvoker invoker({}, Language::Go);
    LexicalToolServices tools;
    auto generator = make_generator("template");
    const auto result = step(session, apply_edit(pre, h1), {&invoker, &tools, nullptr, generator.get()}, {});
    const auto ranks = competition_ranks(result.recommendations);
    auto within3 = [&](const Hunk& h) {
      for (std::size_t i = 0; i < result.recommendations.size(); ++i)
        if (ranks[i] <= 3 && result.recommendations[i].file == h.file && result.recommendations[i].span.start == h.old_span.start)
          return true;
      return false;
    };
    const bool h3 = within3(record.hunks.at(2)), h4 = within3(record.hunks.at(3));
    ok = ok && result.decision && result.decision->fires(CompositionType::DefUse) && h3 && h4;
    detail += std::string("H3 ") + (h3 ? "in" : "not in") + " top-3, H4 " + (h4 ? "in" : "not in") + " top-3";
  }
  {
    const auto dir = t::make_repo(t::scratch_dir("sampler"), t::sampler_commits());
    const auto record = load_commit(dir, t::head_commit(dir), Language::Python);
    const auto pre = checkout_project(dir, record.parent_id, Language::Python);
    t::drop_scratch(dir);
    EditSession session;
    const Edit h1 = record.hunks.at(0).to_edit();
    session.append(h1);
    HeuristicInvoker invoker;
    LexicalToolServices tools;
    auto generator = make_generator("template");
    const auto result = step(session, apply_edit(pre, h1), {&invoker, &tools, nullptr, generator.get()}, {});
    ok = ok && result.decision && result.decision->fires(CompositionType::Clone);
    for (std::size_t i : {1u, 2u}) {
      const Edit gold = *rebase_edit(record.hunks.at(i).to_edit(), session.latest());
      double best = 0;
      for (const auto& rec : result.recommendations)
        if (rec.file == gold.file && rec.location().intersects(gold.location()) && !rec.candidates.empty())
          best = std::max(best, bleu4(rec.candidates.front().post_code, gold.code_after));
      ok = ok && best == 100.0;
      detail += "; H" + std::to_string(i + 1) + " BLEU-4 " + fmt(best);
    }
  }
  return {ok, detail};
}

Outcome dataset_integrity() {
  const auto& records = corpus().records;
  std::size_t violations = 0;
  const auto samples = build_locator_dataset(records);
  for (const auto& s : samples)
    for (const auto& h : s.priors) violations += h.touches(s.window.file, s.window.span);
  std::set<std::string> repos;
  for (const auto& r : records) repos.insert(r.repo_id);
  std::vector<std::string> ids;
  for (int i = 0; i < 40; ++i) ids.push_back("repo" + std::to_string(i));
  ids.insert(ids.end(), repos.begin(), repos.end());
  std::size_t overlap = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto split = split_by_repo(ids, seed);
    std::set<std::string> seen;
    for (const auto* part : {&split.train, &split.valid, &split.test})
      for (const auto& id : *part) overlap += !seen.insert(id).second;
  }
  return {!samples.empty() && violations == 0 && overlap == 0,
          std::to_string(samples.size()) + " locator samples, " + std::to_string(violations) + " prior overlaps, " +
              std::to_string(overlap) + " split overlaps"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"length law over mined hunks", length_law},
      {"lossless reconstruction", lossless},
      {"golden label sequence", golden},
      {"condition rewrite as insert plus replace", reformulation},
      {"token LCS against brute force", lcs_oracle},
      {"multi-semantic ratio", semantic_ratio},
      {"BLEU-4 against reference implementation", bleu_oracle},
      {"invoker benchmark", invoker_suite},
      {"language server rename and references", lsp_counts},
      {"simulation invariants", simulation_invariants},
      {"motivating commits end to end", motivating},
      {"dataset integrity", dataset_integrity},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << ++n << "] " << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
