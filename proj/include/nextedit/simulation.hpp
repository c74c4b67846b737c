#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nextedit/mining.hpp"
#include "nextedit/pipeline.hpp"

namespace nextedit {

inline constexpr int kSimReportSchema = 1;

struct SimConfig {
  std::uint64_t seed = 0;
  StepConfig step;
  std::vector<int> ks{1, 3, 5};
  double min_overlap = 0.5;  // strictly more than this share of the gold lines
};

struct StepRecord {
  int index = 0;
  std::map<int, bool> matched;
  std::map<int, bool> accepted;
  std::optional<double> best_bleu;  // only when a prediction matched
  bool random_pick = false;
  std::string file;  // the gold edit applied
  LineSpan span;
  std::size_t recommendations = 0;
  std::optional<CompositionDecision> decision;
  double latency_s = 0.0;  // location phase only
};

struct BleuBands {
  double exact = 0.0;  // share with BLEU 100
  double high = 0.0;   // [50, 100)
  double low = 0.0;    // < 50
  std::size_t steps = 0;
};

struct CommitReport {
  std::string repo_id;
  std::string commit_id;
  std::vector<StepRecord> steps;
  bool final_tree_matches = false;
  std::map<int, double> match_rate;  // percentages
  std::map<int, double> acceptance;
  BleuBands bands;
  double mean_latency_s = 0.0;
};

struct SimReport {
  std::vector<CommitReport> commits;
  std::map<int, double> match_rate;  // micro average over all steps
  std::map<int, double> acceptance;
  BleuBands bands;
  double mean_latency_s = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
};

/// Called with one JSON object per step, for --trace.
using TraceSink = std::function<void(const json&)>;

/// Replays one commit: the first hunk is the initial edit; every step asks
/// the engine for recommendations, the virtual programmer picks the best
/// ranked one overlapping a remaining gold hunk (else a random remaining
/// hunk), and the gold content is applied.
CommitReport simulate_record(const CommitRecord& record, const Project& pre_commit, const Project& post_commit,
                             const Engine& engine, const SimConfig& cfg = {}, const TraceSink& trace = {});
CommitReport simulate_commit(const std::filesystem::path& repo, const std::string& commit, Language lang,
                             const Engine& engine, const SimConfig& cfg = {}, const TraceSink& trace = {});

/// Micro averages over every step of every commit.
SimReport aggregate(std::vector<CommitReport> reports, std::uint64_t seed = 0);

/// Latencies are left out unless asked for, so reports of one seed are
/// byte-identical.
json report_json(const SimReport& r, bool with_timing = false);
void to_json(json& j, const StepRecord& s);

}  // namespace nextedit
