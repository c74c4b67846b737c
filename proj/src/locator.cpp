#include "nextedit/locator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nextedit/clone.hpp"
#include "nextedit/process.hpp"

namespace nextedit {

std::vector<CodeWindow> slice_file(const std::string& path, const TextFile& file, Language lang,
                                   const WindowConfig& cfg) {
  if (cfg.size < 1 || cfg.stride < 1 || cfg.stride > cfg.size)
    throw Error(ErrorCode::InvalidArgument, "window config needs size >= 1 and 1 <= stride <= size");
  std::vector<CodeWindow> out;
  const int n = file.line_count();
  for (int offset = 0; offset < n; offset += cfg.stride) {
    CodeWindow w;
    w.file = path;
    w.language = lang;
    w.span = {offset + 1, std::min(n, offset + cfg.size)};
    w.lines.assign(file.lines.begin() + offset, file.lines.begin() + w.span.end);
    out.push_back(std::move(w));
    if (out.back().span.end == n) break;
  }
  return out;
}

std::vector<CodeWindow> slice_windows(const Project& project, const WindowConfig& cfg) {
  std::vector<CodeWindow> out;
  for (const auto& path : project.paths()) {
    auto ws = slice_file(path, project.file(path), project.language(), cfg);
    out.insert(out.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
  }
  return out;
}

CodeWindow window_around(const Project& project, const std::string& file, const LineSpan& span,
                         const WindowConfig& cfg) {
  const auto& text = project.file(file);
  const int n = text.line_count();
  CodeWindow w;
  w.file = file;
  w.language = project.language();
  if (n == 0) {
    w.span = {1, 0};
    return w;
  }
  const int first = std::clamp(span.empty() ? span.start - 1 : span.start, 1, n);
  const int last = std::clamp(span.empty() ? span.start : span.end, first, n);
  const int len = last - first + 1;
  int start = first - std::max(0, (cfg.size - len) / 2);
  start = std::max(1, std::min(start, n - cfg.size + 1));
  const int end = std::min(n, std::max(last, start + cfg.size - 1));
  w.span = {start, end};
  w.lines.assign(text.lines.begin() + start - 1, text.lines.begin() + end);
  return w;
}

LabelSequence LabelSequence::unchanged(std::size_t lines) {
  LabelSequence s;
  s.inline_labels.assign(lines, InlineLabel::Keep);
  s.inter_labels.assign(lines + 1, InterLabel::Null);
  s.inline_confidence.assign(lines, 1.0);
  s.inter_confidence.assign(lines + 1, 1.0);
  return s;
}

bool LabelSequence::has_edit() const noexcept {
  return std::any_of(inline_labels.begin(), inline_labels.end(), [](auto l) { return l != InlineLabel::Keep; }) ||
         std::any_of(inter_labels.begin(), inter_labels.end(), [](auto l) { return l != InterLabel::Null; });
}

double LabelSequence::window_score() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < inline_labels.size(); ++i)
    if (inline_labels[i] != InlineLabel::Keep && i < inline_confidence.size()) best = std::max(best, inline_confidence[i]);
  for (std::size_t i = 0; i < inter_labels.size(); ++i)
    if (inter_labels[i] != InterLabel::Null && i < inter_confidence.size()) best = std::max(best, inter_confidence[i]);
  return best;
}

void LabelSequence::validate() const {
  if (inter_labels.size() != inline_labels.size() + 1 || inline_confidence.size() != inline_labels.size() ||
      inter_confidence.size() != inter_labels.size())
    throw Error(ErrorCode::LengthMismatch, "label sequence violates |inter| = |inline| + 1");
  for (double c : inline_confidence)
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite confidence");
  for (double c : inter_confidence)
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite confidence");
}

std::vector<EditLabel> LabelSequence::flat() const {
  std::vector<EditLabel> out;
  out.reserve(inline_labels.size() + inter_labels.size());
  for (auto l : inline_labels) out.push_back(as_edit_label(l));
  for (auto l : inter_labels) out.push_back(as_edit_label(l));
  return out;
}

LabelSequence gold_window_labels(const CodeWindow& window, std::span<const EnrichedHunk> hunks) {
  const int n = static_cast<int>(window.lines.size());
  auto out = LabelSequence::unchanged(window.lines.size());
  for (const auto& e : hunks) {
    if (e.hunk.file != window.file) continue;
    const int base = e.hunk.old_span.start - window.span.start;
    for (int k = 0; k < static_cast<int>(e.inline_labels.size()); ++k) {
      const int idx = base + k;
      if (idx >= 0 && idx < n) out.inline_labels[idx] = e.inline_labels[k];
    }
    for (int g = 0; g < static_cast<int>(e.inter_labels.size()); ++g) {
      const int idx = base + g;
      if (idx < 0 || idx > n || e.inter_labels[g] == InterLabel::Null) continue;
      // A split whose other block lies outside the window says nothing here.
      if (e.inter_labels[g] == InterLabel::BlockSplit && (idx == 0 || idx == n)) continue;
      out.inter_labels[idx] = e.inter_labels[g];
    }
  }
  return out;
}

std::string render_masked(const LocatorQuery& query) {
  std::string out;
  for (const auto& line : query.window.lines) {
    out += "<INTER-MASK>\n<MASK>";
    out += escape_sentinels(line);
    out += '\n';
  }
  out += "<INTER-MASK>\n";
  if (query.prompt) out += escape_sentinels(*query.prompt) + "\n";
  for (const auto& p : query.priors) {
    Hunk h;
    h.file = p.file;
    h.old_lines = p.code_before;
    h.new_lines = p.code_after;
    h.old_span = p.old_span();
    h.new_span = p.new_span();
    out += "<PRIOR>\n";
    out += render_enriched(enrich(h, query.window.language));
  }
  return out;
}

std::vector<std::string> edit_terms(const Edit& e) {
  auto terms = lexical_words(join_lines(e.code_before));
  auto after = lexical_words(join_lines(e.code_after));
  terms.insert(terms.end(), after.begin(), after.end());
  return terms;
}

std::vector<Edit> select_prior_edits(const CodeWindow& window, std::span<const Edit> priors, std::size_t k,
                                     Bm25Params params) {
  std::vector<std::vector<std::string>> docs;
  std::vector<std::uint64_t> recency;
  for (const auto& p : priors) {
    docs.push_back(edit_terms(p));
    recency.push_back(p.timestamp);
  }
  const auto query = lexical_words(join_lines(window.lines));
  std::vector<Edit> out;
  for (auto i : bm25_top_k(query, std::move(docs), k, recency, params)) out.push_back(priors[i]);
  return out;
}

LabelSequence CloneBaselineLocator::predict(const LocatorQuery& query) {
  const auto& lines = query.window.lines;
  const Language lang = query.window.language;
  auto out = LabelSequence::unchanged(lines.size());
  std::vector<std::vector<std::string>> window_features(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) window_features[i] = clone_features(std::span(&lines[i], 1), lang);

  for (const auto& prior : query.priors) {
    if (prior.code_before.empty()) continue;
    std::vector<std::vector<std::string>> prior_features;
    std::vector<std::string> block;
    for (const auto& l : prior.code_before) {
      prior_features.push_back(clone_features(std::span(&l, 1), lang));
      block.insert(block.end(), prior_features.back().begin(), prior_features.back().end());
    }
    // Line against line.
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (window_features[i].size() < min_tokens_) continue;
      for (const auto& pf : prior_features) {
        if (pf.size() < min_tokens_) continue;
        if (multiset_jaccard(window_features[i], pf) + 1e-12 >= threshold_) {
          out.inline_labels[i] = InlineLabel::Replace;
          break;
        }
      }
    }
    // Whole pre-edit block against each block-sized slice of the window.
    const std::size_t n = prior.code_before.size();
    if (n < 2 || n > lines.size() || block.size() < min_tokens_) continue;
    for (std::size_t s = 0; s + n <= lines.size(); ++s) {
      std::vector<std::string> slice;
      for (std::size_t i = s; i < s + n; ++i) slice.insert(slice.end(), window_features[i].begin(), window_features[i].end());
      if (multiset_jaccard(slice, block) + 1e-12 >= threshold_)
        for (std::size_t i = s; i < s + n; ++i) out.inline_labels[i] = InlineLabel::Replace;
    }
  }
  return out;
}

std::string label_name(EditLabel l) {
  auto t = tag(l);
  return std::string(t.substr(1, t.size() - 2));
}

std::optional<EditLabel> label_from_name(std::string_view name) {
  std::string norm(name);
  std::replace(norm.begin(), norm.end(), '_', '-');
  std::transform(norm.begin(), norm.end(), norm.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return edit_label_from_tag(norm);
}

json ExternalLocator::request(const LocatorQuery& query) {
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
  return json{{"window_lines", query.window.lines},
              {"file", query.window.file},
              {"span", query.window.span},
              {"prompt", query.prompt ? json(*query.prompt) : json(nullptr)},
              {"priors_enriched", priors},
              {"masked_input", render_masked(query)}};
}

namespace {

std::pair<EditLabel, double> parse_scored(const json& item) {
  std::string name;
  double score = 1.0;
  if (item.is_string()) {
    name = item.get<std::string>();
  } else if (item.is_array() && item.size() == 2) {
    name = item[0].get<std::string>();
    score = item[1].get<double>();
  } else if (item.is_object()) {
    name = item.at("label").get<std::string>();
    score = item.value("score", 1.0);
  } else {
    throw Error(ErrorCode::MalformedEncoding, "label entry must be a name or [name, score]");
  }
  auto l = label_from_name(name);
  if (!l) throw Error(ErrorCode::MalformedEncoding, "unknown label " + name);
  return {*l, score};
}

}  // namespace

LabelSequence ExternalLocator::parse_response(const json& response, std::size_t lines) {
  const auto& inl = response.at("inline");
  const auto& inter = response.at("inter");
  if (inl.size() != lines || inter.size() != lines + 1)
    throw Error(ErrorCode::LengthMismatch, "response labels do not match the window length");
  LabelSequence s;
  for (const auto& item : inl) {
    auto [l, score] = parse_scored(item);
    if (l != EditLabel::Keep && l != EditLabel::Replace && l != EditLabel::Delete)
      throw Error(ErrorCode::MalformedEncoding, "inter-line label in an inline position");
    s.inline_labels.push_back(static_cast<InlineLabel>(static_cast<int>(l)));
    s.inline_confidence.push_back(score);
  }
  for (const auto& item : inter) {
    auto [l, score] = parse_scored(item);
    if (l != EditLabel::Null && l != EditLabel::Insert && l != EditLabel::BlockSplit)
      throw Error(ErrorCode::MalformedEncoding, "inline label in an inter-line position");
    s.inter_labels.push_back(static_cast<InterLabel>(static_cast<int>(l) - 3));
    s.inter_confidence.push_back(score);
  }
  s.validate();
  return s;
}

LabelSequence ExternalLocator::predict(const LocatorQuery& query) {
  if (!scorer_) throw Error(ErrorCode::BackendUnavailable, "no external locator configured");
  return parse_response(scorer_(request(query)), query.window.lines.size());
}

JsonScorer command_scorer(std::vector<std::string> argv) {
  return [argv = std::move(argv)](const json& request) -> json {
    ProcessResult r;
    try {
      r = run_process(argv, {}, request.dump() + "\n");
    } catch (const Error& e) {
      throw Error(ErrorCode::BackendUnavailable, e.what());
    }
    if (r.status != 0) throw Error(ErrorCode::BackendUnavailable, argv.front() + " exited with " + std::to_string(r.status));
    try {
      return json::parse(r.out);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::BackendUnavailable, std::string("unparseable backend output: ") + e.what());
    }
  };
}

std::unique_ptr<LocatorBackend> make_locator(const std::string& name, JsonScorer scorer) {
  if (name == "clone_baseline" || name == "clone" || name == "ccd") return std::make_unique<CloneBaselineLocator>();
  if (name == "external") return std::make_unique<ExternalLocator>(std::move(scorer));
  throw Error(ErrorCode::InvalidArgument, "unknown locator backend " + name);
}

LabelMetrics evaluate_labels(std::span<const EditLabel> predicted, std::span<const EditLabel> gold) {
  if (predicted.size() != gold.size()) throw Error(ErrorCode::LengthMismatch, "prediction and gold differ in length");
  LabelMetrics m;
  m.positions = gold.size();
  if (gold.empty()) return m;
  std::array<std::size_t, kEditLabelCount> tp{}, pred_count{}, gold_count{};
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto p = static_cast<int>(predicted[i]), g = static_cast<int>(gold[i]);
    ++pred_count[p];
    ++gold_count[g];
    if (p == g) {
      ++tp[p];
      ++correct;
    }
  }
  m.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(gold.size());
  int classes = 0;
  for (int c = 0; c < kEditLabelCount; ++c) {
    if (pred_count[c] == 0 && gold_count[c] == 0) continue;
    ++classes;
    const double p = pred_count[c] ? static_cast<double>(tp[c]) / static_cast<double>(pred_count[c]) : 0.0;
    const double r = gold_count[c] ? static_cast<double>(tp[c]) / static_cast<double>(gold_count[c]) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    m.macro_precision += p;
    m.macro_recall += r;
    m.macro_f1 += f;
    m.f1_per_class[static_cast<EditLabel>(c)] = 100.0 * f;
  }
  m.macro_precision *= 100.0 / classes;
  m.macro_recall *= 100.0 / classes;
  m.macro_f1 *= 100.0 / classes;
  return m;
}

LabelMetrics evaluate_locator(std::span<const LabelSequence> predicted, std::span<const LabelSequence> gold) {
  if (predicted.size() != gold.size()) throw Error(ErrorCode::LengthMismatch, "window counts differ");
  std::vector<EditLabel> p, g;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto pf = predicted[i].flat();
    auto gf = gold[i].flat();
    if (pf.size() != gf.size()) throw Error(ErrorCode::LengthMismatch, "window " + std::to_string(i) + " differs in length");
    p.insert(p.end(), pf.begin(), pf.end());
    g.insert(g.end(), gf.begin(), gf.end());
  }
  return evaluate_labels(p, g);
}

void to_json(json& j, const CodeWindow& w) {
  j = json{{"file", w.file}, {"span", w.span}, {"lines", w.lines}, {"language", to_string(w.language)}};
}

void from_json(const json& j, CodeWindow& w) {
  w.file = normalize_path(j.at("file").get<std::string>());
  w.span = j.at("span").get<LineSpan>();
  w.lines = j.at("lines").get<Lines>();
  w.language = language_from_string(j.value("language", std::string("python")));
  if (w.span.length() != static_cast<int>(w.lines.size())) throw Error(ErrorCode::InvalidArgument, "window span disagrees with its lines");
}

void to_json(json& j, const LabelSequence& s) {
  json inl = json::array(), inter = json::array();
  for (std::size_t i = 0; i < s.inline_labels.size(); ++i)
    inl.push_back({label_name(as_edit_label(s.inline_labels[i])), s.inline_confidence.at(i)});
  for (std::size_t i = 0; i < s.inter_labels.size(); ++i)
    inter.push_back({label_name(as_edit_label(s.inter_labels[i])), s.inter_confidence.at(i)});
  j = json{{"inline", inl}, {"inter", inter}};
}

void from_json(const json& j, LabelSequence& s) { s = ExternalLocator::parse_response(j, j.at("inline").size()); }

void to_json(json& j, const LabelMetrics& m) {
  json per = json::object();
  for (const auto& [c, f] : m.f1_per_class) per[label_name(c)] = f;
  j = json{{"accuracy", m.accuracy},   {"macro_precision", m.macro_precision}, {"macro_recall", m.macro_recall},
           {"macro_f1", m.macro_f1}, {"positions", m.positions},             {"f1_per_class", per}};
}

}  // namespace nextedit
