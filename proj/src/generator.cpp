#include "nextedit/generator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nextedit/tokenizer.hpp"

namespace nextedit {

GenerationQuery GenerationQuery::from_sample(const GeneratorSample& s) {
  GenerationQuery q;
  q.window = s.window;
  q.labels = s.labels;
  if (!s.prompt.empty()) q.prompt = s.prompt;
  for (const auto& h : s.priors) q.priors.push_back(hunk_edit(h));
  return q;
}

std::optional<LineSpan> target_region(const LabelSequence& labels) {
  const int n = static_cast<int>(labels.inline_labels.size());
  int first = n + 1, last = -1;
  for (int i = 0; i < n; ++i) {
    if (labels.inline_labels[i] == InlineLabel::Keep) continue;
    first = std::min(first, i + 1);
    last = std::max(last, i + 1);
  }
  for (int g = 0; g < static_cast<int>(labels.inter_labels.size()); ++g) {
    if (labels.inter_labels[g] != InterLabel::Insert) continue;
    first = std::min(first, g + 1);  // inserting before window line g + 1
    last = std::max(last, g);
  }
  if (last < 0) return std::nullopt;
  return LineSpan{first, last};
}

Edit candidate_edit(const GenerationQuery& query, const Candidate& candidate) {
  auto region = target_region(query.labels);
  if (!region) throw Error(ErrorCode::InvalidArgument, "query has no edit label");
  Edit e;
  e.file = query.window.file;
  e.line_start = query.window.span.start + region->start - 1;
  e.line_end = query.window.span.start + region->end - 1;
  e.code_before.assign(query.window.lines.begin() + (region->start - 1), query.window.lines.begin() + region->end);
  e.code_after = candidate.post_code;
  return e;
}

namespace {

// Tokens of some lines with their byte offsets in the '\n'-joined text.
struct Located {
  std::string text;
  std::vector<SyntaxToken> tokens;
  std::vector<std::size_t> start;

  Located(std::span<const std::string> lines, Language lang) : text(join_lines(lines)) {
    std::vector<std::size_t> line_off;
    std::size_t off = 0;
    for (const auto& l : lines) {
      line_off.push_back(off);
      off += l.size() + 1;
    }
    for (auto& t : tokenize(lines, lang)) {
      if (t.kind == TokenKind::Comment) continue;
      start.push_back(line_off[t.line - 1] + t.column);
      tokens.push_back(std::move(t));
    }
  }
  std::size_t end(std::size_t i) const { return start[i] + tokens[i].text.size(); }
  std::size_t size() const { return tokens.size(); }
  // Offset after the leading indentation, used for the start sentinel.
  std::size_t head() const {
    if (!tokens.empty()) return start[0];
    const auto p = text.find_first_not_of(" \t");
    return p == std::string::npos ? text.size() : p;
  }
  std::size_t tail() const { return tokens.empty() ? head() : end(tokens.size() - 1); }
};

// One contiguous change between two matched tokens of a replaced block.
// Boundaries are token indices; -1 and size() stand for the block edges.
struct ChangeRun {
  long b_left, b_right;
  long a_left, a_right;
};

std::vector<ChangeRun> change_runs(const std::vector<MatchPair>& m, long nb, long na) {
  std::vector<ChangeRun> runs;
  long pb = -1, pa = -1;
  auto close = [&](long qb, long qa) {
    if (qb - pb > 1 || qa - pa > 1) runs.push_back({pb, qb, pa, qa});
    pb = qb;
    pa = qa;
  };
  for (auto [i, j] : m) close(i, j);
  close(nb, na);
  return runs;
}

struct Replacement {
  std::size_t from, to;
  std::string text;
};

std::string apply_replacements(std::string text, std::vector<Replacement> reps) {
  std::sort(reps.begin(), reps.end(), [](const auto& x, const auto& y) { return x.from > y.from; });
  for (const auto& r : reps) text.replace(r.from, r.to - r.from, r.text);
  return text;
}

}  // namespace

std::vector<Candidate> TemplateReplayGenerator::generate(const GenerationQuery& query, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  auto region = target_region(query.labels);
  if (!region || region->empty()) return {};
  const Language lang = query.window.language;
  const std::span<const std::string> target_lines(query.window.lines.data() + (region->start - 1),
                                                  static_cast<std::size_t>(region->length()));
  const Located target(target_lines, lang);
  std::vector<Candidate> out;

  // Pure deletions need no template.
  bool deletes_only = true;
  for (int i = region->start; i <= region->end; ++i)
    deletes_only = deletes_only && query.labels.inline_labels[i - 1] != InlineLabel::Replace;
  for (auto g : query.labels.inter_labels) deletes_only = deletes_only && g != InterLabel::Insert;
  if (deletes_only) {
    Candidate c;
    for (int i = region->start; i <= region->end; ++i)
      if (query.labels.inline_labels[i - 1] == InlineLabel::Keep) c.post_code.push_back(query.window.lines[i - 1]);
    c.score = 1.0;
    return finalize_candidates({std::move(c)}, k);
  }
  if (target.size() == 0) return {};

  for (std::size_t rank = 0; rank < query.priors.size(); ++rank) {
    const Edit& prior = query.priors[rank];
    if (prior.code_before.empty() || prior.is_noop()) continue;
    Hunk h;
    h.file = prior.file;
    h.old_lines = prior.code_before;
    h.new_lines = prior.code_after;
    h.old_span = prior.old_span();
    h.new_span = prior.new_span();
    EnrichedHunk enriched;
    try {
      enriched = enrich(h, lang);
    } catch (const Error&) {
      continue;
    }
    for (const auto& block : enriched.replace_blocks) {
      const Located before(std::span(prior.code_before).subspan(block.old_first, block.old_last - block.old_first + 1),
                           lang);
      const Located after(block.new_lines, lang);
      if (before.size() == 0) continue;
      const auto to_target = lcs_match(before.tokens, target.tokens);
      const double ratio = 2.0 * static_cast<double>(to_target.size()) /
                           static_cast<double>(before.size() + target.size());
      if (ratio < min_alignment_) continue;
      std::vector<long> where(before.size(), -1);
      for (auto [i, j] : to_target) where[i] = j;

      const auto runs = change_runs(lcs_match(before.tokens, after.tokens), static_cast<long>(before.size()),
                                    static_cast<long>(after.size()));
      std::vector<Replacement> usable;
      for (const auto& run : runs) {
        const long nb = static_cast<long>(before.size()), nt = static_cast<long>(target.size());
        const long p = run.b_left < 0 ? -1 : where[run.b_left];
        const long q = run.b_right >= nb ? nt : where[run.b_right];
        if ((run.b_left >= 0 && p < 0) || (run.b_right < nb && q < 0)) continue;
        if (q - p != run.b_right - run.b_left) continue;
        bool contiguous = true;
        for (long x = run.b_left + 1; x < run.b_right && contiguous; ++x) contiguous = where[x] == p + (x - run.b_left);
        if (!contiguous) continue;
        const std::size_t t_from = p < 0 ? target.head() : target.end(p);
        const std::size_t t_to = q >= nt ? target.tail() : target.start[q];
        const std::size_t a_from = run.a_left < 0 ? after.head() : after.end(run.a_left);
        const std::size_t a_to = run.a_right >= static_cast<long>(after.size()) ? after.tail() : after.start[run.a_right];
        if (t_from > t_to || a_from > a_to) continue;
        usable.push_back({t_from, t_to, after.text.substr(a_from, a_to - a_from)});
      }
      if (usable.empty()) continue;

      const double per_run = ratio / static_cast<double>(runs.size());
      auto emit = [&](std::vector<Replacement> subset) {
        Candidate c;
        c.score = per_run * static_cast<double>(subset.size());
        c.post_code = split_lines(apply_replacements(target.text, std::move(subset)));
        out.push_back(std::move(c));
      };
      emit(usable);
      // Partial replays, for priors whose runs only partly carry over.
      if (usable.size() >= 2 && usable.size() <= 4) {
        const unsigned full = (1u << usable.size()) - 1;
        for (unsigned mask = full - 1; mask > 0; --mask) {
          std::vector<Replacement> subset;
          for (std::size_t b = 0; b < usable.size(); ++b)
            if (mask & (1u << b)) subset.push_back(usable[b]);
          emit(std::move(subset));
        }
      }
    }
  }
  const Lines unchanged(target_lines.begin(), target_lines.end());
  std::erase_if(out, [&](const Candidate& c) { return c.post_code == unchanged; });
  return finalize_candidates(std::move(out), k);
}

std::vector<Candidate> finalize_candidates(std::vector<Candidate> candidates, int k) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  std::vector<Candidate> out;
  std::set<Lines> seen;
  for (auto& c : candidates) {
    if (static_cast<int>(out.size()) >= k) break;
    if (!seen.insert(c.post_code).second) continue;
    c.rank = static_cast<int>(out.size()) + 1;
    out.push_back(std::move(c));
  }
  return out;
}

json ExternalGenerator::request(const GenerationQuery& query, int k) {
  json priors = json::array();
  for (const auto& p : query.priors) {
    Hunk h;
    h.file = p.file;
    h.old_lines = p.code_before;
    h.new_lines = p.code_after;
    h.old_span = p.old_span();
    h.new_span = p.new_span();
    priors.push_back(render_enriched(enrich(h, query.window.language)));
  }
  return json{{"window_with_labels",
               render_labeled_code(query.window.lines, query.labels.inline_labels, query.labels.inter_labels)},
              {"window_lines", query.window.lines},
              {"file", query.window.file},
              {"span", query.window.span},
              {"prompt", query.prompt ? json(*query.prompt) : json(nullptr)},
              {"priors", priors},
              {"k", k}};
}

std::vector<Candidate> ExternalGenerator::parse_response(const json& response, int k) {
  if (!response.is_object() || !response.contains("candidates") || !response["candidates"].is_array())
    throw Error(ErrorCode::BackendUnavailable, "generator response lacks a candidates array");
  std::vector<Candidate> out;
  for (const auto& item : response["candidates"]) {
    Candidate c;
    const auto& code = item.at("post_code");
    c.post_code = code.is_string() ? split_lines(code.get<std::string>()) : code.get<Lines>();
    c.score = item.value("score", 0.0);
    out.push_back(std::move(c));
  }
  return finalize_candidates(std::move(out), k);
}

std::vector<Candidate> ExternalGenerator::generate(const GenerationQuery& query, int k) {
  if (!scorer_) throw Error(ErrorCode::BackendUnavailable, "no external generator configured");
  return parse_response(scorer_(request(query, k)), k);
}

std::unique_ptr<GeneratorBackend> make_generator(const std::string& name, JsonScorer scorer) {
  if (name == "template" || name == "template_replay") return std::make_unique<TemplateReplayGenerator>();
  if (name == "external") return std::make_unique<ExternalGenerator>(std::move(scorer));
  throw Error(ErrorCode::InvalidArgument, "unknown generator backend " + name);
}

double bleu4(std::string_view candidate, std::string_view reference) {
  const auto c = lexical_words(candidate);
  const auto r = lexical_words(reference);
  if (c.empty() || r.empty()) return 0.0;
  constexpr double kEpsilon = 1e-9;
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= 4 && n <= c.size(); ++n) {
    std::map<std::vector<std::string>, int> ref_counts, cand_counts;
    for (std::size_t i = 0; i + n <= r.size(); ++i) ++ref_counts[{r.begin() + i, r.begin() + i + n}];
    for (std::size_t i = 0; i + n <= c.size(); ++i) ++cand_counts[{c.begin() + i, c.begin() + i + n}];
    double clipped = 0;
    for (const auto& [gram, count] : cand_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }
    const double total = static_cast<double>(c.size() - n + 1);
    log_sum += std::log((clipped > 0 ? clipped : kEpsilon) / total);
    ++orders;
  }
  const double cl = static_cast<double>(c.size()), rl = static_cast<double>(r.size());
  const double bp = cl > rl ? 1.0 : std::exp(1.0 - rl / cl);
  return 100.0 * bp * std::exp(log_sum / orders);
}

double bleu4(const Lines& candidate, const Lines& reference) {
  return bleu4(join_lines(candidate), join_lines(reference));
}

bool exact_match(const Lines& a, const Lines& b) {
  if (a.size() != b.size()) return false;
  auto rstrip = [](std::string_view s) {
    const auto end = s.find_last_not_of(" \t\r");
    return end == std::string_view::npos ? std::string_view{} : s.substr(0, end + 1);
  };
  for (std::size_t i = 0; i < a.size(); ++i)
    if (rstrip(a[i]) != rstrip(b[i])) return false;
  return true;
}

GenerationScore evaluate_generation(std::span<const Candidate> candidates, const Lines& gold, std::span<const int> ks) {
  GenerationScore s;
  for (int k : ks) {
    double best = 0.0;
    bool hit = false;
    for (std::size_t i = 0; i < candidates.size() && static_cast<int>(i) < k; ++i) {
      hit = hit || exact_match(candidates[i].post_code, gold);
      best = std::max(best, bleu4(candidates[i].post_code, gold));
    }
    s.emr[k] = hit ? 100.0 : 0.0;
    s.bleu[k] = best;
  }
  return s;
}

GenerationMetrics evaluate_generator(std::span<const GeneratorSample> samples, GeneratorBackend& backend,
                                     std::span<const int> ks) {
  GenerationMetrics m;
  const int k_max = ks.empty() ? 1 : *std::max_element(ks.begin(), ks.end());
  for (int k : ks) m.emr[k] = m.bleu[k] = 0.0;
  for (const auto& sample : samples) {
    const auto candidates = backend.generate(GenerationQuery::from_sample(sample), k_max);
    if (candidates.empty()) ++m.empty;
    const auto score = evaluate_generation(candidates, sample.gold_post_code, ks);
    for (int k : ks) {
      m.emr[k] += score.emr.at(k);
      m.bleu[k] += score.bleu.at(k);
    }
    ++m.samples;
  }
  if (m.samples)
    for (int k : ks) {
      m.emr[k] /= static_cast<double>(m.samples);
      m.bleu[k] /= static_cast<double>(m.samples);
    }
  return m;
}

void to_json(json& j, const Candidate& c) { j = {{"post_code", c.post_code}, {"score", c.score}, {"rank", c.rank}}; }

void to_json(json& j, const GenerationMetrics& m) {
  j = {{"samples", m.samples}, {"empty", m.empty}, {"emr", json::object()}, {"bleu", json::object()}};
  for (const auto& [k, v] : m.emr) j["emr"]["@" + std::to_string(k)] = v;
  for (const auto& [k, v] : m.bleu) j["bleu"]["@" + std::to_string(k)] = v;
}

}  // namespace nextedit
