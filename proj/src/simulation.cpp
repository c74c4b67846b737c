#include "nextedit/simulation.hpp"

#include <algorithm>
#include <random>

namespace nextedit {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double candidate_score(const Candidate& c, const Edit& gold) {
  return exact_match(c.post_code, gold.code_after) ? 100.0 : bleu4(c.post_code, gold.code_after);
}

bool overlaps_gold(const Recommendation& r, const Edit& gold, double min_overlap) {
  return r.file == gold.file && line_overlap_ratio(r.location(), gold.location()) > min_overlap;
}

template <class Steps>
void summarize(const Steps& steps, const std::vector<int>& ks, std::map<int, double>& mr, std::map<int, double>& acc,
               BleuBands& bands, double& latency) {
  std::size_t n = 0;
  std::map<int, std::size_t> m, a;
  latency = 0.0;
  bands = {};
  for (const StepRecord& s : steps) {
    ++n;
    for (int k : ks) {
      m[k] += s.matched.at(k);
      a[k] += s.accepted.at(k);
    }
    latency += s.latency_s;
    if (s.best_bleu) {
      ++bands.steps;
      if (*s.best_bleu >= 100.0)
        bands.exact += 1;
      else if (*s.best_bleu >= 50.0)
        bands.high += 1;
      else
        bands.low += 1;
    }
  }
  for (int k : ks) {
    mr[k] = n ? 100.0 * static_cast<double>(m[k]) / static_cast<double>(n) : 0.0;
    acc[k] = n ? 100.0 * static_cast<double>(a[k]) / static_cast<double>(n) : 0.0;
  }
  if (n) latency /= static_cast<double>(n);
  if (bands.steps) {
    const double t = static_cast<double>(bands.steps);
    bands.exact /= t;
    bands.high /= t;
    bands.low /= t;
  }
}

Project apply_gold(const Project& project, const Edit& gold) {
  Project base = project;
  if (!base.has_file(gold.file) && gold.code_before.empty()) base.set_file(gold.file, TextFile{{}, true});
  try {
    return apply_edit(base, gold);
  } catch (const Error& e) {
    throw Error(ErrorCode::ReplayDesync, gold.file + ":" + std::to_string(gold.line_start) + ": " + e.what());
  }
}

json rate_json(const std::map<int, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j["@" + std::to_string(k)] = v;
  return j;
}

json bands_json(const BleuBands& b) {
  return {{"bleu_100", b.exact}, {"bleu_50_100", b.high}, {"bleu_below_50", b.low}, {"steps", b.steps}};
}

json step_json(const StepRecord& s, bool with_timing) {
  json j = {{"index", s.index},
            {"matched", rate_json({})},
            {"accepted", rate_json({})},
            {"best_bleu", s.best_bleu ? json(*s.best_bleu) : json(nullptr)},
            {"random_pick", s.random_pick},
            {"file", s.file},
            {"span", s.span},
            {"recommendations", s.recommendations}};
  for (const auto& [k, v] : s.matched) j["matched"]["@" + std::to_string(k)] = v;
  for (const auto& [k, v] : s.accepted) j["accepted"]["@" + std::to_string(k)] = v;
  if (s.decision) j["decision"] = *s.decision;
  if (with_timing) j["latency_s"] = s.latency_s;
  return j;
}

}  // namespace

CommitReport simulate_record(const CommitRecord& record, const Project& pre_commit, const Project& post_commit,
                             const Engine& engine, const SimConfig& cfg, const TraceSink& trace) {
  if (record.hunks.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "commit " + record.commit_id + " has fewer than two hunks");
  std::mt19937_64 rng(cfg.seed ^ fnv1a(record.repo_id + ":" + record.commit_id));
  const int k_max = cfg.ks.empty() ? 1 : *std::max_element(cfg.ks.begin(), cfg.ks.end());

  CommitReport report;
  report.repo_id = record.repo_id;
  report.commit_id = record.commit_id;

  // Initialization: the first hunk of the diff is the initial edit.
  EditSession session;
  if (!record.prompt().empty()) session.prompt = record.prompt();
  Project project = apply_gold(pre_commit, record.hunks.front().to_edit());
  session.append(record.hunks.front().to_edit());
  std::vector<Edit> remaining;
  for (std::size_t i = 1; i < record.hunks.size(); ++i) {
    auto e = rebase_edit(record.hunks[i].to_edit(), session.latest());
    if (!e) throw Error(ErrorCode::ReplayDesync, "hunk " + std::to_string(i) + " overlaps the initial edit");
    remaining.push_back(std::move(*e));
  }

  while (!remaining.empty()) {
    StepRecord rec;
    rec.index = static_cast<int>(report.steps.size()) + 1;
    const StepResult sr = step(session, project, engine, cfg.step);
    rec.latency_s = sr.locate_seconds;
    rec.decision = sr.decision;
    const auto& recs = sr.recommendations;
    rec.recommendations = recs.size();
    const auto ranks = competition_ranks(recs);

    for (int k : cfg.ks) rec.matched[k] = rec.accepted[k] = false;
    std::optional<std::size_t> chosen_rec, chosen_gold;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      for (std::size_t j = 0; j < remaining.size(); ++j) {
        if (!overlaps_gold(recs[i], remaining[j], cfg.min_overlap)) continue;
        bool exact = false;
        for (const auto& c : recs[i].candidates) exact = exact || candidate_score(c, remaining[j]) >= 100.0;
        for (int k : cfg.ks) {
          if (ranks[i] > k) continue;
          rec.matched[k] = true;
          rec.accepted[k] = rec.accepted[k] || exact;
        }
        if (!chosen_rec && ranks[i] <= k_max) {
          chosen_rec = i;
          chosen_gold = j;
        }
      }
    }

    if (chosen_gold) {
      double best = 0.0;
      for (const auto& c : recs[*chosen_rec].candidates) best = std::max(best, candidate_score(c, remaining[*chosen_gold]));
      rec.best_bleu = best;
    } else {
      chosen_gold = std::uniform_int_distribution<std::size_t>(0, remaining.size() - 1)(rng);
      rec.random_pick = true;
    }

    // The virtual programmer always applies the gold content.
    const Edit gold = remaining[*chosen_gold];
    remaining.erase(remaining.begin() + static_cast<long>(*chosen_gold));
    project = apply_gold(project, gold);
    session.append(gold);
    for (auto& e : remaining) {
      auto moved = rebase_edit(e, gold);
      if (!moved) throw Error(ErrorCode::ReplayDesync, "gold hunks overlap in " + record.commit_id);
      e = std::move(*moved);
    }
    rec.file = gold.file;
    rec.span = gold.old_span();

    if (trace) {
      json t = step_json(rec, true);
      t["repo_id"] = record.repo_id;
      t["commit_id"] = record.commit_id;
      t["recommendations"] = ranked_json(recs);
      t["applied"] = gold;
      trace(t);
    }
    report.steps.push_back(std::move(rec));
  }

  // Files the commit deleted are left empty by their hunks.
  for (const auto& [path, before] : record.files_before) {
    if (!record.files_after.contains(path) && project.has_file(path) && project.file(path).lines.empty())
      project.remove_file(path);
  }
  // "\ No newline at end of file" is part of the gold content too.
  for (const auto& [path, after] : record.files_after) {
    if (!project.has_file(path)) continue;
    TextFile f = project.file(path);
    if (f.trailing_newline != after.trailing_newline) {
      f.trailing_newline = after.trailing_newline;
      project.set_file(path, std::move(f));
    }
  }
  report.final_tree_matches = project == post_commit;
  summarize(report.steps, cfg.ks, report.match_rate, report.acceptance, report.bands, report.mean_latency_s);
  return report;
}

CommitReport simulate_commit(const std::filesystem::path& repo, const std::string& commit, Language lang,
                             const Engine& engine, const SimConfig& cfg, const TraceSink& trace) {
  const CommitRecord record = load_commit(repo, commit, lang);
  const Project pre = checkout_project(repo, record.parent_id, lang);
  const Project post = checkout_project(repo, record.commit_id, lang);
  return simulate_record(record, pre, post, engine, cfg, trace);
}

SimReport aggregate(std::vector<CommitReport> reports, std::uint64_t seed) {
  if (reports.empty()) throw Error(ErrorCode::EmptyCorpus, "no simulation reports to aggregate");
  SimReport r;
  r.seed = seed;
  r.commits = std::move(reports);
  std::vector<StepRecord> all;
  std::vector<int> ks;
  for (const auto& c : r.commits) {
    for (const auto& s : c.steps) {
      all.push_back(s);
      for (const auto& [k, v] : s.matched)
        if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
    }
  }
  std::sort(ks.begin(), ks.end());
  r.steps = all.size();
  summarize(all, ks, r.match_rate, r.acceptance, r.bands, r.mean_latency_s);
  return r;
}

json report_json(const SimReport& r, bool with_timing) {
  json agg = {{"steps", r.steps},
              {"match_rate", rate_json(r.match_rate)},
              {"acceptance", rate_json(r.acceptance)},
              {"bleu_bands", bands_json(r.bands)}};
  if (with_timing) agg["mean_latency_s"] = r.mean_latency_s;
  json commits = json::array();
  for (const auto& c : r.commits) {
    json cj = {{"repo_id", c.repo_id},
               {"commit_id", c.commit_id},
               {"final_tree_matches", c.final_tree_matches},
               {"match_rate", rate_json(c.match_rate)},
               {"acceptance", rate_json(c.acceptance)},
               {"bleu_bands", bands_json(c.bands)},
               {"steps", json::array()}};
    if (with_timing) cj["mean_latency_s"] = c.mean_latency_s;
    for (const auto& s : c.steps) cj["steps"].push_back(step_json(s, with_timing));
    commits.push_back(std::move(cj));
  }
  return {{"schema_version", kSimReportSchema}, {"seed", r.seed}, {"aggregate", agg}, {"commits", commits}};
}

void to_json(json& j, const StepRecord& s) { j = step_json(s, true); }

}  // namespace nextedit
