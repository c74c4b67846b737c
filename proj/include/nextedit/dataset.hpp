#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nextedit/locator.hpp"
#include "nextedit/mining.hpp"

namespace nextedit {

struct LocatorSample {
  std::string repo_id;
  std::string commit_id;
  CodeWindow window;
  LabelSequence gold;
  std::vector<Hunk> priors;  // BM25 order, none touching the window
  std::string prompt;
};

struct GeneratorSample {
  std::string repo_id;
  std::string commit_id;
  CodeWindow window;
  LabelSequence labels;  // only the target hunk is labeled
  Hunk target;
  Lines gold_post_code;
  std::vector<Hunk> priors;
  std::string prompt;
};

struct GeneratorWindowConfig {
  int context = 3;      // lines of context each side when available
  int min_context = 2;  // below this the window is clipped by neighbouring hunks only
};

/// Every window of every touched file (pre-commit version), gold labels from
/// the commit's hunks, and up to `max_priors` same-commit hunks not touching
/// the window as paired priors.
std::vector<LocatorSample> build_locator_dataset(const std::vector<CommitRecord>& records,
                                                 const WindowConfig& cfg = {}, std::size_t max_priors = 3);

/// One sample per hunk; the window is the hunk plus context, never reaching
/// another hunk of the commit. Priors: up to 3 other hunks of the commit.
std::vector<GeneratorSample> build_generator_dataset(const std::vector<CommitRecord>& records,
                                                     const GeneratorWindowConfig& cfg = {},
                                                     std::size_t max_priors = 3);

/// The hunk as an edit applied on its own to the pre-commit file.
Edit hunk_edit(const Hunk& h);

struct DatasetSplit {
  std::vector<std::string> train, valid, test;
  std::uint64_t seed = 0;
  std::string of(const std::string& repo_id) const;
};

/// 70/10/20 split of distinct repository ids, shuffled with the seed.
DatasetSplit split_by_repo(std::vector<std::string> repo_ids, std::uint64_t seed);

void to_json(json& j, const LocatorSample& s);
void from_json(const json& j, LocatorSample& s);
void to_json(json& j, const GeneratorSample& s);
void from_json(const json& j, GeneratorSample& s);
void to_json(json& j, const DatasetSplit& s);

}  // namespace nextedit
