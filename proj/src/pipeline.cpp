#include "nextedit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <set>
#include <tuple>

namespace nextedit {

std::string_view to_string(Provenance p) noexcept { return p == Provenance::Tool ? "tool" : "neural"; }

LineSpan Recommendation::location() const noexcept {
  if (!span.empty()) return span;
  const int line = std::max(1, span.start - 1);
  return {line, line};
}

std::vector<LabelSequence> split_hunks(const LabelSequence& labels) {
  const int n = static_cast<int>(labels.inline_labels.size());
  std::vector<LabelSequence> out;
  std::optional<LabelSequence> run;
  auto open = [&] {
    if (!run) run = LabelSequence::unchanged(labels.inline_labels.size());
  };
  auto close = [&] {
    if (run) out.push_back(std::move(*run));
    run.reset();
  };
  auto conf = [](const std::vector<double>& v, int i) { return i < static_cast<int>(v.size()) ? v[i] : 1.0; };
  for (int g = 0; g <= n; ++g) {
    const InterLabel gap = labels.inter_labels[g];
    if (gap == InterLabel::Insert || (gap == InterLabel::BlockSplit && run)) {
      open();
      run->inter_labels[g] = gap;
      run->inter_confidence[g] = conf(labels.inter_confidence, g);
    }
    if (g == n) break;
    if (labels.inline_labels[g] == InlineLabel::Keep) {
      close();
      continue;
    }
    open();
    run->inline_labels[g] = labels.inline_labels[g];
    run->inline_confidence[g] = conf(labels.inline_confidence, g);
  }
  close();
  return out;
}

std::vector<int> competition_ranks(std::span<const Recommendation> recs) {
  std::vector<int> ranks;
  ranks.reserve(recs.size());
  for (const auto& r : recs) {
    int better = 0;
    for (const auto& o : recs) better += o.confidence > r.confidence;
    ranks.push_back(better + 1);
  }
  return ranks;
}

std::vector<Recommendation> rank_recommendations(std::vector<Recommendation> recs, std::span<const Edit> priors) {
  std::vector<std::pair<std::string, LineSpan>> edited;
  const auto spans = current_spans(priors);
  for (std::size_t i = 0; i < priors.size(); ++i)
    if (spans[i] && !spans[i]->empty()) edited.emplace_back(priors[i].file, *spans[i]);
  std::erase_if(recs, [&](const Recommendation& r) {
    return std::any_of(edited.begin(), edited.end(),
                       [&](const auto& e) { return r.file == e.first && r.location().intersects(e.second); });
  });

  std::string anchor_file;
  int anchor_line = 1;
  if (!priors.empty()) {
    anchor_file = priors.back().file;
    anchor_line = priors.back().location().start;
  }
  auto key = [&](const Recommendation& r) {
    const bool same = r.file == anchor_file;
    return std::make_tuple(-r.confidence, r.provenance == Provenance::Tool ? 0 : 1, same ? 0 : 1,
                           same ? std::abs(r.span.start - anchor_line) : 0, std::cref(r.file), r.span.start,
                           r.span.end);
  };
  std::stable_sort(recs.begin(), recs.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });

  std::vector<Recommendation> out;
  std::set<std::tuple<std::string, int, int>> seen;
  for (auto& r : recs)
    if (seen.emplace(r.file, r.span.start, r.span.end).second) out.push_back(std::move(r));
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double run_confidence(const LabelSequence& run) {
  double best = 0.0;
  for (std::size_t i = 0; i < run.inline_labels.size(); ++i)
    if (run.inline_labels[i] != InlineLabel::Keep) best = std::max(best, run.inline_confidence[i]);
  for (std::size_t g = 0; g < run.inter_labels.size(); ++g)
    if (run.inter_labels[g] != InterLabel::Null) best = std::max(best, run.inter_confidence[g]);
  return best;
}

// File span a single-hunk labeling asks to rewrite.
std::optional<LineSpan> run_span(const CodeWindow& w, const LabelSequence& run) {
  auto region = target_region(run);
  if (!region) return std::nullopt;
  return LineSpan{w.span.start + region->start - 1, w.span.start + region->end - 1};
}

bool transient(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Timeout:
    case ErrorCode::ServerError:
    case ErrorCode::TransportClosed:
    case ErrorCode::HandshakeTimeout:
    case ErrorCode::LaunchFailed:
      return true;
    default:
      return false;
  }
}

LabelSequence predict(LocatorBackend& locator, const CodeWindow& w, const EditSession& session,
                      const StepConfig& cfg) {
  LocatorQuery q;
  q.window = w;
  q.prompt = session.prompt;
  q.priors = select_prior_edits(w, session.prior_edits, cfg.max_priors);
  return locator.predict(q);
}

// A location-only tool hit becomes a window whose labels come from the
// locator when it labels inside the hit, else REPLACE over the hit.
Recommendation tool_location(const ToolEditCandidate& hit, const Project& project, const EditSession& session,
                             const Engine& engine, const StepConfig& cfg) {
  Recommendation r;
  r.provenance = Provenance::Tool;
  r.confidence = 1.0;
  r.service = hit.source;
  r.window = window_around(project, hit.file, hit.span, cfg.windows);
  r.file = hit.file;
  r.span = hit.span;
  if (engine.locator) {
    try {
      for (auto& run : split_hunks(predict(*engine.locator, r.window, session, cfg))) {
        auto span = run_span(r.window, run);
        const LineSpan probe = span && span->empty() ? LineSpan{span->start, span->start} : span.value_or(LineSpan{});
        if (!span || !(probe.intersects(hit.span) || (span->empty() && span->start == hit.span.end + 1))) continue;
        r.labels = std::move(run);
        r.span = *span;
        return r;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BackendUnavailable) throw;
    }
  }
  r.labels = LabelSequence::unchanged(r.window.lines.size());
  for (int line = hit.span.start; line <= hit.span.end; ++line) {
    const int i = line - r.window.span.start;
    if (i >= 0 && i < static_cast<int>(r.window.lines.size())) r.labels.inline_labels[i] = InlineLabel::Replace;
  }
  return r;
}

}  // namespace

StepResult step(const EditSession& session, const Project& project, const Engine& engine, const StepConfig& cfg) {
  StepResult result;
  const Edit& latest = session.latest();
  const std::span<const Edit> earlier(session.prior_edits.data(), session.prior_edits.size() - 1);
  std::vector<Recommendation> recs;
  const auto t0 = Clock::now();

  // Deduction.
  if (engine.invoker && engine.tools) {
    InvokerContext ctx;
    ctx.project = &project;
    result.decision = engine.invoker->classify(latest, earlier, ctx);
    std::vector<ToolEditCandidate> hits;
    try {
      if (!result.decision->invoked.empty()) {
        hits = fire_services(*result.decision, *engine.tools, project, latest, earlier, cfg.invoker);
        hits = confirm_invocation(*result.decision, std::move(hits), project, latest, earlier);
      }
      if (cfg.diagnostics_wait_ms >= 0) {
        engine.tools->sync(project);
        for (auto& d : engine.tools->diagnostics(latest.file, cfg.diagnostics_wait_ms)) hits.push_back(std::move(d));
      }
    } catch (const Error& e) {
      if (!transient(e)) throw;
      result.tools_failed = true;
      hits.clear();
    }
    for (const auto& hit : hits) {
      if (!project.has_file(hit.file)) continue;
      if (hit.replacement) {
        Recommendation r;
        r.provenance = Provenance::Tool;
        r.confidence = 1.0;
        r.service = hit.source;
        r.file = hit.file;
        r.span = hit.span;
        r.window = window_around(project, hit.file, hit.span, cfg.windows);
        r.labels = LabelSequence::unchanged(r.window.lines.size());
        for (int line = hit.span.start; line <= hit.span.end; ++line)
          r.labels.inline_labels[line - r.window.span.start] = InlineLabel::Replace;
        r.candidates.push_back(Candidate{*hit.replacement, 1.0, 1});
        recs.push_back(std::move(r));
      } else {
        recs.push_back(tool_location(hit, project, session, engine, cfg));
      }
    }
  }

  // Induction, when deduction found nothing.
  if (recs.empty() && engine.locator) {
    for (const auto& w : slice_windows(project, cfg.windows)) {
      LabelSequence labels;
      try {
        labels = predict(*engine.locator, w, session, cfg);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BackendUnavailable) throw;
        break;
      }
      if (!labels.has_edit()) continue;
      for (auto& run : split_hunks(labels)) {
        Recommendation r;
        r.provenance = Provenance::Neural;
        r.window = w;
        r.file = w.file;
        r.span = *run_span(w, run);
        r.confidence = run_confidence(run);
        r.labels = std::move(run);
        recs.push_back(std::move(r));
      }
    }
  }

  recs = rank_recommendations(std::move(recs), session.prior_edits);
  if (recs.size() > cfg.max_recommendations) recs.resize(cfg.max_recommendations);
  result.locate_seconds = seconds_since(t0);

  const auto t1 = Clock::now();
  if (engine.generator) {
    for (auto& r : recs) {
      if (!r.candidates.empty()) continue;
      GenerationQuery q;
      q.window = r.window;
      q.labels = r.labels;
      q.prompt = session.prompt;
      q.priors = select_prior_edits(r.window, session.prior_edits, cfg.max_priors);
      try {
        r.candidates = engine.generator->generate(q, cfg.candidates);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BackendUnavailable) throw;
      }
    }
  }
  result.generate_seconds = seconds_since(t1);
  result.recommendations = std::move(recs);
  return result;
}

void to_json(json& j, const Recommendation& r) {
  j = json{{"file", r.file},
           {"span", r.span},
           {"confidence", r.confidence},
           {"provenance", std::string(to_string(r.provenance))},
           {"window", r.window.span},
           {"labels", r.labels},
           {"candidates", r.candidates}};
  if (r.service) j["service"] = std::string(to_string(*r.service));
}

json ranked_json(std::span<const Recommendation> recs, std::size_t limit) {
  const auto ranks = competition_ranks(recs);
  json out = json::array();
  for (std::size_t i = 0; i < recs.size() && i < limit; ++i) {
    json r = recs[i];
    r["rank"] = ranks[i];
    out.push_back(std::move(r));
  }
  return out;
}

Edit recommendation_edit(const Recommendation& rec, const Project& project, std::size_t candidate) {
  if (candidate >= rec.candidates.size())
    throw Error(ErrorCode::InvalidArgument, "recommendation has no candidate " + std::to_string(candidate));
  if (!project.has_file(rec.file)) throw Error(ErrorCode::FileMissing, rec.file);
  const auto& lines = project.file(rec.file).lines;
  if (rec.span.start < 1 || rec.span.end > static_cast<int>(lines.size()))
    throw Error(ErrorCode::ContentMismatch, rec.file + " no longer has the recommended lines");
  Edit e;
  e.file = rec.file;
  e.line_start = rec.span.start;
  e.line_end = rec.span.end;
  e.code_before.assign(lines.begin() + (rec.span.start - 1), lines.begin() + rec.span.end);
  // The window snapshot tells whether the lines moved since prediction.
  const auto& w = rec.window;
  if (w.file == rec.file && !rec.span.empty()) {
    for (int line = rec.span.start; line <= rec.span.end; ++line) {
      if (!w.span.contains(line)) continue;
      if (w.lines[static_cast<std::size_t>(line - w.span.start)] != lines[static_cast<std::size_t>(line - 1)])
        throw Error(ErrorCode::ContentMismatch, "stale recommendation at " + rec.file + ":" + std::to_string(line));
    }
  }
  e.code_after = rec.candidates[candidate].post_code;
  return e;
}

}  // namespace nextedit
