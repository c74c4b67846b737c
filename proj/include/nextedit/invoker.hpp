#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "nextedit/lsp/services.hpp"
#include "nextedit/mining.hpp"

namespace nextedit {

enum class CompositionType { VarRename, FuncRename, DefUse, Clone, Diagnose };

/// The classes the invoker predicts; diagnostics are pushed by the server
/// instead.
inline constexpr std::array<CompositionType, 4> kInvokerClasses{CompositionType::VarRename, CompositionType::FuncRename,
                                                                CompositionType::DefUse, CompositionType::Clone};

std::string_view to_string(CompositionType t) noexcept;
std::optional<CompositionType> composition_from_string(std::string_view name) noexcept;

/// An edit that only replaces one identifier by another (possibly at several
/// places).
struct RenameInfo {
  std::string old_name;
  std::string new_name;
  bool function = false;
  Position before;  // first substituted occurrence, pre-edit coordinates
  Position after;   // same occurrence, post-edit coordinates
};

std::optional<RenameInfo> detect_rename(const Edit& edit, Language lang);

/// A function definition line (or a call): its name and parameter tokens.
struct Signature {
  std::string name;
  std::vector<std::string> params;
  int line = 0;    // 0-based within the scanned lines
  int column = 0;  // byte column of the name
};
std::vector<Signature> find_signatures(std::span<const std::string> lines, Language lang);

/// The edit changes the parameter list of a function it touches; returns
/// that function's signature in the post-edit code.
std::optional<Signature> changed_signature(const Edit& edit, Language lang);
/// A call the edit kept but passed a different number of arguments.
std::optional<Signature> changed_arity_call(const Edit& edit, Language lang);
/// Whether some file of `project` defines a function called `name`.
bool defines_function(const Project& project, const std::string& name);

struct CompositionDecision {
  std::map<CompositionType, double> scores;
  std::set<CompositionType> invoked;
  double threshold = 0.5;
  std::optional<RenameInfo> rename;
  /// The function whose definition or call arity the edit changed.
  std::optional<Signature> signature;

  bool fires(CompositionType t) const { return invoked.contains(t); }
};

struct InvokerConfig {
  double threshold = 0.5;
  double clone_threshold = 0.7;
  std::size_t clone_min_tokens = 5;
  /// Clones are looked for in the edited file only; identical code in other
  /// modules is rarely part of the same change.
  bool clone_same_file = true;
  std::size_t token_budget = 512;
};

/// <BEFORE>code_b</BEFORE><AFTER>code_a</AFTER> of the latest edit, then of
/// the priors newest first while the lexical token budget lasts.
std::string encode_input(const Edit& last, std::span<const Edit> priors, std::size_t token_budget = 512);

/// What a backend may look at beyond the edits themselves.
struct InvokerContext {
  const Project* project = nullptr;  // state after `last`
  /// Precomputed clone strength of the last edit (benchmarks store it).
  std::optional<double> clone_similarity;
};

class InvokerBackend {
 public:
  virtual ~InvokerBackend() = default;
  virtual std::string name() const = 0;
  virtual CompositionDecision classify(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) = 0;
};

/// Rule-based scores: rename shape, signature change, clone strength.
class HeuristicInvoker : public InvokerBackend {
 public:
  explicit HeuristicInvoker(InvokerConfig cfg = {}, Language lang = Language::Python) : cfg_(cfg), lang_(lang) {}
  std::string name() const override { return "heuristic"; }
  CompositionDecision classify(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) override;
  /// Similarity of the closest clone of the edited code that no edit has
  /// touched yet.
  double clone_score(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) const;

 private:
  InvokerConfig cfg_;
  Language lang_;
};

/// Fires every service.
class BlindInvoker : public InvokerBackend {
 public:
  std::string name() const override { return "blind"; }
  CompositionDecision classify(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) override;
};

/// Fires each service with probability 1/2, seeded by the run seed and the
/// edit text so results do not depend on call order.
class RandomInvoker : public InvokerBackend {
 public:
  explicit RandomInvoker(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "random"; }
  CompositionDecision classify(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) override;

 private:
  std::uint64_t seed_;
};

/// encoded text -> {"VAR_RENAME": p, ...}. Throws BackendUnavailable.
using CompositionScorer = std::function<std::map<std::string, double>(const std::string& encoded)>;

/// A learned classifier behind a scorer; falls back to the heuristic when
/// the scorer is unavailable.
class ExternalInvoker : public InvokerBackend {
 public:
  ExternalInvoker(CompositionScorer scorer, InvokerConfig cfg = {}, Language lang = Language::Python)
      : scorer_(std::move(scorer)), cfg_(cfg), fallback_(cfg, lang) {}
  std::string name() const override { return "external"; }
  CompositionDecision classify(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) override;
  bool fell_back() const noexcept { return fell_back_; }

 private:
  CompositionScorer scorer_;
  InvokerConfig cfg_;
  HeuristicInvoker fallback_;
  bool fell_back_ = false;
};

std::unique_ptr<InvokerBackend> make_invoker(const std::string& name, Language lang, std::uint64_t seed = 0,
                                             CompositionScorer scorer = {}, InvokerConfig cfg = {});

/// Renames at the pre-edit position of `last`. The server briefly sees the
/// project with the rename composition so far (`last` and every prior making
/// the same substitution) reverted, so the old identifier still resolves.
/// Results inside those edits are dropped. Renames keep line counts, so the
/// rest are already in current coordinates.
std::vector<ToolEditCandidate> rename_after_edit(ToolServices& tools, const Project& current, const Edit& last,
                                                 std::span<const Edit> priors, const RenameInfo& rename);

/// Fires the services for every invoked composition (clone included) and
/// returns the raw results in current coordinates.
std::vector<ToolEditCandidate> fire_services(const CompositionDecision& decision, ToolServices& tools,
                                             const Project& current, const Edit& last, std::span<const Edit> priors,
                                             const InvokerConfig& cfg = {});

/// Drops unsafe results: renames whose other occurrences sit on lines an
/// earlier edit already changed (a usage change, not a rename), references
/// that are not call/definition sites of the edited function. Clone results
/// come back sorted by similarity.
std::vector<ToolEditCandidate> confirm_invocation(const CompositionDecision& decision,
                                                  std::vector<ToolEditCandidate> results, const Project& current,
                                                  const Edit& last, std::span<const Edit> priors);

struct InvokerSample {
  std::string repo_id;
  std::string commit_id;
  Edit target;                    // H_t, post-edited, latest
  std::vector<Edit> backgrounds;  // applied before H_t
  std::set<CompositionType> labels;
  std::string encoded;
  double clone_similarity = 0.0;
};

struct InvokerBenchConfig {
  std::uint64_t seed = 0;
  std::size_t max_backgrounds = 2;
  InvokerConfig invoker;
};

/// One sample per commit: H_t plus up to two background hunks applied, the
/// services fired at H_t, and a class labeled positive when its service hits
/// one of the hunks still unapplied (line overlap).
InvokerSample build_invoker_sample(const CommitRecord& commit, const Project& pre_commit, ToolServices& tools,
                                   const InvokerBenchConfig& cfg = {});
std::vector<InvokerSample> build_invoker_benchmark(const std::vector<CommitRecord>& commits,
                                                   const std::function<Project(const CommitRecord&)>& checkout,
                                                   ToolServices& tools, const InvokerBenchConfig& cfg = {});

struct ClassMetrics {
  double precision = 0.0;  // percentages
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t positives = 0;
  std::size_t predicted = 0;
};

struct InvokerMetrics {
  std::map<CompositionType, ClassMetrics> per_class;
  ClassMetrics macro;
  std::size_t samples = 0;
};

InvokerMetrics evaluate_invoker(std::span<const InvokerSample> samples, InvokerBackend& backend);
InvokerMetrics score_predictions(std::span<const std::set<CompositionType>> predicted,
                                 std::span<const std::set<CompositionType>> gold);

void to_json(json& j, const InvokerSample& s);
void from_json(const json& j, InvokerSample& s);
void to_json(json& j, const InvokerMetrics& m);
void to_json(json& j, const CompositionDecision& d);

}  // namespace nextedit
