#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nextedit/dataset.hpp"
#include "nextedit/locator.hpp"

namespace nextedit {

struct GenerationQuery {
  CodeWindow window;
  LabelSequence labels;  // one hunk's worth of edit labels
  std::optional<std::string> prompt;
  std::vector<Edit> priors;  // selected, most relevant first

  static GenerationQuery from_sample(const GeneratorSample& s);
};

struct Candidate {
  Lines post_code;
  double score = 0.0;
  int rank = 1;
};

/// Window-relative (1-based) lines the labels ask to rewrite: from the first
/// non-KEEP line or INSERT gap to the last. Empty when the window has no
/// edit label; a pure insertion gives the empty span at its gap.
std::optional<LineSpan> target_region(const LabelSequence& labels);

/// The edit a candidate stands for, in file coordinates.
Edit candidate_edit(const GenerationQuery& query, const Candidate& candidate);

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Candidate> generate(const GenerationQuery& query, int k) = 0;
};

/// Replays the token changes of prior edits on the target lines. A prior
/// qualifies when one of its replaced blocks aligns with the target (token
/// Dice ratio over the LCS >= min_alignment); each change run of that block
/// is applied when its boundary tokens and removed tokens sit contiguously
/// in the target. Yields [] when no prior qualifies.
class TemplateReplayGenerator : public GeneratorBackend {
 public:
  explicit TemplateReplayGenerator(double min_alignment = 0.6) : min_alignment_(min_alignment) {}
  std::string name() const override { return "template"; }
  std::vector<Candidate> generate(const GenerationQuery& query, int k) override;

 private:
  double min_alignment_;
};

/// Sends {window_with_labels, window_lines, file, span, prompt, priors} and
/// expects {candidates: [{post_code, score}]}.
class ExternalGenerator : public GeneratorBackend {
 public:
  explicit ExternalGenerator(JsonScorer scorer) : scorer_(std::move(scorer)) {}
  std::string name() const override { return "external"; }
  std::vector<Candidate> generate(const GenerationQuery& query, int k) override;
  static json request(const GenerationQuery& query, int k);
  static std::vector<Candidate> parse_response(const json& response, int k);

 private:
  JsonScorer scorer_;
};

std::unique_ptr<GeneratorBackend> make_generator(const std::string& name, JsonScorer scorer = {});

/// Sorts by score (stable), drops duplicates, keeps k, renumbers ranks.
std::vector<Candidate> finalize_candidates(std::vector<Candidate> candidates, int k);

/// BLEU-4 over lexical tokens, 0-100. Orders longer than the candidate are
/// left out; zero matches count as 1e-9. Empty candidate scores 0.
double bleu4(std::string_view candidate, std::string_view reference);
double bleu4(const Lines& candidate, const Lines& reference);

/// Byte equality after stripping trailing whitespace from each line.
bool exact_match(const Lines& a, const Lines& b);

struct GenerationScore {
  std::map<int, double> emr;   // 0 or 100
  std::map<int, double> bleu;  // best BLEU-4 in the top k
};

GenerationScore evaluate_generation(std::span<const Candidate> candidates, const Lines& gold,
                                    std::span<const int> ks = std::vector<int>{1, 3, 5, 10});

struct GenerationMetrics {
  std::map<int, double> emr;  // means over samples, percentages
  std::map<int, double> bleu;
  std::size_t samples = 0;
  std::size_t empty = 0;  // samples without any candidate
};

GenerationMetrics evaluate_generator(std::span<const GeneratorSample> samples, GeneratorBackend& backend,
                                     std::span<const int> ks = std::vector<int>{1, 3, 5, 10});

void to_json(json& j, const Candidate& c);
void to_json(json& j, const GenerationMetrics& m);

}  // namespace nextedit
