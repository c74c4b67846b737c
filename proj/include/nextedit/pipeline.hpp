#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nextedit/generator.hpp"
#include "nextedit/invoker.hpp"
#include "nextedit/locator.hpp"

namespace nextedit {

enum class Provenance { Tool, Neural };
std::string_view to_string(Provenance p) noexcept;

struct Recommendation {
  std::string file;
  LineSpan span;  // lines to rewrite; empty = insertion before span.start
  CodeWindow window;
  LabelSequence labels;  // over `window`, only this recommendation's hunk
  std::vector<Candidate> candidates;
  double confidence = 0.0;
  Provenance provenance = Provenance::Neural;
  std::optional<ToolService> service;

  /// Span used for matching: the lines, or the line above an insertion.
  LineSpan location() const noexcept;
};

struct StepConfig {
  WindowConfig windows;
  int candidates = 10;
  std::size_t max_priors = 3;
  std::size_t max_recommendations = 20;
  InvokerConfig invoker;
  int diagnostics_wait_ms = -1;  // < 0: do not poll diagnostics
};

/// The backends a step runs on. A null invoker or tools disables deduction,
/// a null locator disables induction, a null generator leaves location-only
/// recommendations without candidates.
struct Engine {
  InvokerBackend* invoker = nullptr;
  ToolServices* tools = nullptr;
  LocatorBackend* locator = nullptr;
  GeneratorBackend* generator = nullptr;
};

struct StepResult {
  std::vector<Recommendation> recommendations;
  std::optional<CompositionDecision> decision;
  bool tools_failed = false;
  double locate_seconds = 0.0;
  double generate_seconds = 0.0;
};

/// One round of next-edit prediction after the session's latest edit:
/// invoker and confirmed tool services first; windows through locator and
/// generator when no composition yields anything; then ranking.
StepResult step(const EditSession& session, const Project& project, const Engine& engine,
                const StepConfig& cfg = {});

/// Splits a window's labels into one labeling per hunk: maximal runs of
/// non-KEEP lines and INSERT gaps not separated by a KEEP line.
std::vector<LabelSequence> split_hunks(const LabelSequence& labels);

/// Drops recommendations on lines an earlier edit already produced, orders
/// by confidence (tools first on ties), then proximity to the latest edit
/// (same file by line distance, other files after), then path and line, and
/// keeps the best one per (file, span).
std::vector<Recommendation> rank_recommendations(std::vector<Recommendation> recs, std::span<const Edit> priors);

/// Competition ranks of an ordered list: 1 + number of strictly more
/// confident recommendations. Equal confidences share a rank, so a backend
/// that cannot rank puts everything at rank 1.
std::vector<int> competition_ranks(std::span<const Recommendation> recs);

void to_json(json& j, const Recommendation& r);

/// The first `limit` recommendations, each with its competition rank. Trace
/// records and the session server share this shape.
json ranked_json(std::span<const Recommendation> recs, std::size_t limit = 10);

/// The edit that accepting `candidate` of `rec` applies to `project`.
/// Throws ContentMismatch when the span no longer holds the code it was
/// predicted on.
Edit recommendation_edit(const Recommendation& rec, const Project& project, std::size_t candidate = 0);

}  // namespace nextedit
