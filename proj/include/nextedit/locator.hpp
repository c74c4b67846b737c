#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nextedit/bm25.hpp"
#include "nextedit/representation.hpp"
#include "nextedit/serialize.hpp"

namespace nextedit {

struct WindowConfig {
  int size = 20;
  int stride = 10;
};

struct CodeWindow {
  std::string file;
  LineSpan span;
  Lines lines;
  Language language = Language::Python;
};

/// Windows at offsets 0, S, 2S, ... until one reaches the end of the file;
/// that last one is cut at the file end. Empty files yield none.
std::vector<CodeWindow> slice_file(const std::string& path, const TextFile& file, Language lang,
                                   const WindowConfig& cfg = {});
std::vector<CodeWindow> slice_windows(const Project& project, const WindowConfig& cfg = {});

/// A window of `cfg.size` lines (or fewer at file edges) containing `span`.
CodeWindow window_around(const Project& project, const std::string& file, const LineSpan& span,
                         const WindowConfig& cfg = {});

struct LabelSequence {
  std::vector<InlineLabel> inline_labels;
  std::vector<InterLabel> inter_labels;
  std::vector<double> inline_confidence;
  std::vector<double> inter_confidence;

  static LabelSequence unchanged(std::size_t lines);
  /// Any label other than KEEP/NULL.
  bool has_edit() const noexcept;
  /// Highest confidence among edit labels, 0 when there is none.
  double window_score() const noexcept;
  void validate() const;
  /// Inline labels followed by inter labels in the shared alphabet.
  std::vector<EditLabel> flat() const;
};

/// Gold labels of a window: labels of every hunk touching it, clipped to
/// the window; everything else KEEP/NULL.
LabelSequence gold_window_labels(const CodeWindow& window, std::span<const EnrichedHunk> hunks);

struct LocatorQuery {
  CodeWindow window;
  std::optional<std::string> prompt;
  std::vector<Edit> priors;  // most relevant first
};

/// Masked rendering fed to neural locators: <MASK> before each line and
/// <INTER-MASK> on every gap; priors follow in the enriched encoding.
std::string render_masked(const LocatorQuery& query);

/// Tokens of an edit used as its BM25 document: code_before then code_after.
std::vector<std::string> edit_terms(const Edit& e);

/// The top-k priors by BM25 against the window text; ties go to the newer
/// edit (larger timestamp).
std::vector<Edit> select_prior_edits(const CodeWindow& window, std::span<const Edit> priors, std::size_t k = 3,
                                     Bm25Params params = {});

class LocatorBackend {
 public:
  virtual ~LocatorBackend() = default;
  virtual std::string name() const = 0;
  virtual LabelSequence predict(const LocatorQuery& query) = 0;
};

/// Naive code-clone detector: a window line similar enough to a line of some
/// prior's pre-edit code is marked REPLACE. It cannot rank, so every hit gets
/// confidence 1.0.
class CloneBaselineLocator : public LocatorBackend {
 public:
  explicit CloneBaselineLocator(double threshold = 0.7, std::size_t min_tokens = 4)
      : threshold_(threshold), min_tokens_(min_tokens) {}
  std::string name() const override { return "clone_baseline"; }
  LabelSequence predict(const LocatorQuery& query) override;

 private:
  double threshold_;
  std::size_t min_tokens_;
};

/// JSON request -> JSON response. Throws BackendUnavailable when the model
/// cannot be reached.
using JsonScorer = std::function<json(const json&)>;

/// Sends {window_lines, prompt, priors_enriched, masked_input} and expects
/// {inline: [[label, score], ...], inter: [...]}.
class ExternalLocator : public LocatorBackend {
 public:
  explicit ExternalLocator(JsonScorer scorer) : scorer_(std::move(scorer)) {}
  std::string name() const override { return "external"; }
  LabelSequence predict(const LocatorQuery& query) override;
  static json request(const LocatorQuery& query);
  static LabelSequence parse_response(const json& response, std::size_t lines);

 private:
  JsonScorer scorer_;
};

/// A scorer that runs `argv` once per request, JSON on stdin and stdout.
JsonScorer command_scorer(std::vector<std::string> argv);

std::unique_ptr<LocatorBackend> make_locator(const std::string& name, JsonScorer scorer = {});

struct LabelMetrics {
  double accuracy = 0.0;  // percentages
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::size_t positions = 0;
  std::map<EditLabel, double> f1_per_class;
};

/// Macro metrics over the classes occurring in gold or prediction; a class
/// with no predictions (or no gold) contributes 0 precision (recall).
LabelMetrics evaluate_labels(std::span<const EditLabel> predicted, std::span<const EditLabel> gold);
/// Inline and inter positions of every window, pooled.
LabelMetrics evaluate_locator(std::span<const LabelSequence> predicted, std::span<const LabelSequence> gold);

void to_json(json& j, const CodeWindow& w);
void from_json(const json& j, CodeWindow& w);
void to_json(json& j, const LabelSequence& s);
void from_json(const json& j, LabelSequence& s);
void to_json(json& j, const LabelMetrics& m);

std::string label_name(EditLabel l);
std::optional<EditLabel> label_from_name(std::string_view name);

}  // namespace nextedit
