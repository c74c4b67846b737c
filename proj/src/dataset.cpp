#include "nextedit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace nextedit {

Edit hunk_edit(const Hunk& h) {
  Edit e;
  e.file = h.file;
  e.line_start = h.old_span.start;
  e.line_end = h.old_span.end;
  e.code_before = h.old_lines;
  e.code_after = h.new_lines;
  return e;
}

namespace {

// Ranks candidate hunks against `query` text; later hunks win ties.
std::vector<Hunk> rank_priors(const std::vector<std::string>& query, const std::vector<const Hunk*>& candidates,
                              std::size_t k) {
  std::vector<std::vector<std::string>> docs;
  std::vector<std::uint64_t> recency;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    docs.push_back(edit_terms(hunk_edit(*candidates[i])));
    recency.push_back(i);
  }
  std::vector<Hunk> out;
  for (auto i : bm25_top_k(query, std::move(docs), k, recency)) out.push_back(*candidates[i]);
  return out;
}

std::map<std::string, std::vector<EnrichedHunk>> enrich_by_file(const CommitRecord& r) {
  std::map<std::string, std::vector<EnrichedHunk>> out;
  for (const auto& h : r.hunks) out[h.file].push_back(enrich(h, r.language));
  return out;
}

}  // namespace

std::vector<LocatorSample> build_locator_dataset(const std::vector<CommitRecord>& records, const WindowConfig& cfg,
                                                 std::size_t max_priors) {
  std::vector<LocatorSample> out;
  for (const auto& r : records) {
    const auto enriched = enrich_by_file(r);
    for (const auto& [path, hunks] : enriched) {
      const auto it = r.files_before.find(path);
      const TextFile empty;
      const TextFile& before = it == r.files_before.end() ? empty : it->second;
      for (auto& window : slice_file(path, before, r.language, cfg)) {
        LocatorSample s;
        s.repo_id = r.repo_id;
        s.commit_id = r.commit_id;
        s.prompt = r.prompt();
        s.gold = gold_window_labels(window, hunks);
        std::vector<const Hunk*> candidates;
        for (const auto& h : r.hunks)
          if (!h.touches(window.file, window.span)) candidates.push_back(&h);
        s.priors = rank_priors(lexical_words(join_lines(window.lines)), candidates, max_priors);
        s.window = std::move(window);
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

std::vector<GeneratorSample> build_generator_dataset(const std::vector<CommitRecord>& records,
                                                     const GeneratorWindowConfig& cfg, std::size_t max_priors) {
  std::vector<GeneratorSample> out;
  for (const auto& r : records) {
    for (std::size_t t = 0; t < r.hunks.size(); ++t) {
      const Hunk& target = r.hunks[t];
      const auto it = r.files_before.find(target.file);
      if (it == r.files_before.end()) continue;
      const TextFile& before = it->second;
      const int n = before.line_count();
      // Gaps the target occupies: before its first line up to after its last.
      const int first_line = target.old_lines.empty() ? target.old_span.start - 1 : target.old_span.start;
      const int last_line = target.old_lines.empty() ? target.old_span.start : target.old_span.end;
      int lo = std::max(1, first_line - cfg.context);
      int hi = std::min(n, last_line + cfg.context);
      for (const auto& other : r.hunks) {
        if (&other == &target || other.file != target.file) continue;
        const int o_first_gap = other.old_span.start;
        const int o_last_gap = other.old_lines.empty() ? other.old_span.start : other.old_span.end + 1;
        if (o_first_gap > last_line) hi = std::min(hi, o_first_gap - 2);
        else lo = std::max(lo, o_last_gap + 1);
      }
      lo = std::max(lo, 1);
      hi = std::min(hi, n);
      if (hi < lo) continue;
      GeneratorSample s;
      s.repo_id = r.repo_id;
      s.commit_id = r.commit_id;
      s.prompt = r.prompt();
      s.target = target;
      s.gold_post_code = target.new_lines;
      s.window.file = target.file;
      s.window.language = r.language;
      s.window.span = {lo, hi};
      s.window.lines.assign(before.lines.begin() + lo - 1, before.lines.begin() + hi);
      const EnrichedHunk e = enrich(target, r.language);
      s.labels = gold_window_labels(s.window, std::span(&e, 1));
      std::vector<const Hunk*> candidates;
      for (const auto& h : r.hunks)
        if (&h != &target) candidates.push_back(&h);
      s.priors = rank_priors(lexical_words(join_lines(s.window.lines)), candidates, max_priors);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string DatasetSplit::of(const std::string& repo_id) const {
  if (std::find(train.begin(), train.end(), repo_id) != train.end()) return "train";
  if (std::find(valid.begin(), valid.end(), repo_id) != valid.end()) return "valid";
  if (std::find(test.begin(), test.end(), repo_id) != test.end()) return "test";
  return {};
}

DatasetSplit split_by_repo(std::vector<std::string> repo_ids, std::uint64_t seed) {
  std::sort(repo_ids.begin(), repo_ids.end());
  repo_ids.erase(std::unique(repo_ids.begin(), repo_ids.end()), repo_ids.end());
  std::mt19937_64 rng(seed);
  // Fisher-Yates with explicit draws so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = repo_ids.size(); i > 1; --i) std::swap(repo_ids[i - 1], repo_ids[rng() % i]);
  const std::size_t n = repo_ids.size();
  const auto n_train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(n)));
  const auto n_valid = std::min(n - n_train, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n))));
  DatasetSplit s;
  s.seed = seed;
  s.train.assign(repo_ids.begin(), repo_ids.begin() + n_train);
  s.valid.assign(repo_ids.begin() + n_train, repo_ids.begin() + n_train + n_valid);
  s.test.assign(repo_ids.begin() + n_train + n_valid, repo_ids.end());
  return s;
}

void to_json(json& j, const LocatorSample& s) {
  j = json{{"repo_id", s.repo_id}, {"commit_id", s.commit_id}, {"window", s.window},
           {"gold", s.gold},       {"priors", s.priors},       {"prompt", s.prompt}};
}

void from_json(const json& j, LocatorSample& s) {
  s.repo_id = j.at("repo_id").get<std::string>();
  s.commit_id = j.at("commit_id").get<std::string>();
  s.window = j.at("window").get<CodeWindow>();
  s.gold = j.at("gold").get<LabelSequence>();
  s.priors = j.at("priors").get<std::vector<Hunk>>();
  s.prompt = j.value("prompt", std::string());
}

void to_json(json& j, const GeneratorSample& s) {
  j = json{{"repo_id", s.repo_id}, {"commit_id", s.commit_id},           {"window", s.window},
           {"labels", s.labels},   {"target", s.target},                 {"gold_post_code", s.gold_post_code},
           {"priors", s.priors},   {"prompt", s.prompt}};
}

void from_json(const json& j, GeneratorSample& s) {
  s.repo_id = j.at("repo_id").get<std::string>();
  s.commit_id = j.at("commit_id").get<std::string>();
  s.window = j.at("window").get<CodeWindow>();
  s.labels = j.at("labels").get<LabelSequence>();
  s.target = j.at("target").get<Hunk>();
  s.gold_post_code = j.at("gold_post_code").get<Lines>();
  s.priors = j.at("priors").get<std::vector<Hunk>>();
  s.prompt = j.value("prompt", std::string());
}

void to_json(json& j, const DatasetSplit& s) {
  j = json{{"seed", s.seed}, {"train", s.train}, {"valid", s.valid}, {"test", s.test}};
}

}  // namespace nextedit
