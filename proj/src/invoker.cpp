#include "nextedit/invoker.hpp"

#include <algorithm>
#include <random>

#include "nextedit/clone.hpp"
#include "nextedit/tokenizer.hpp"

namespace nextedit {

namespace {

constexpr std::array<std::pair<CompositionType, std::string_view>, 5> kNames{{
    {CompositionType::VarRename, "VAR_RENAME"},
    {CompositionType::FuncRename, "FUNC_RENAME"},
    {CompositionType::DefUse, "DEF_USE"},
    {CompositionType::Clone, "CLONE"},
    {CompositionType::Diagnose, "DIAGNOSE"},
}};

bool is_function_introducer(std::string_view w) { return w == "def" || w == "func" || w == "function"; }

bool is_type_word(std::string_view w) {
  static constexpr std::string_view kWords[] = {"void",    "int",       "long",    "double",   "float",
                                                "boolean", "char",      "byte",    "short",    "public",
                                                "private", "protected", "static",  "final",    "async",
                                                "abstract", "synchronized", "override", "native"};
  return std::find(std::begin(kWords), std::end(kWords), w) != std::end(kWords);
}

// Index of the token closing the bracket opened at `open`, or tokens.size().
std::size_t matching_close(std::span<const SyntaxToken> toks, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < toks.size(); ++i) {
    if (toks[i].text == "(") ++depth;
    if (toks[i].text == ")" && --depth == 0) return i;
  }
  return toks.size();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void attach_analysis(CompositionDecision& d, const Edit& last, std::span<const Edit> priors, Language lang,
                     const Project* project) {
  d.rename = detect_rename(last, lang);
  // An import or a reference passed as a value looks like a variable; the
  // rest of the composition or the project tells.
  if (d.rename && !d.rename->function) {
    for (const auto& p : priors) {
      auto r = detect_rename(p, lang);
      if (r && r->function && r->old_name == d.rename->old_name && r->new_name == d.rename->new_name)
        d.rename->function = true;
    }
    if (project)
      d.rename->function = d.rename->function || defines_function(*project, d.rename->old_name) ||
                           defines_function(*project, d.rename->new_name);
  }
  d.signature = changed_signature(last, lang);
  if (!d.signature) d.signature = changed_arity_call(last, lang);
}

// Whether the pre-edit code is worth a clone probe. Short code and lone
// function headers match far too much once identifiers are abstracted.
bool clone_probe(const Edit& last, Language lang, const InvokerConfig& cfg) {
  if (last.code_before.empty() || clone_features(last.code_before, lang).size() < cfg.clone_min_tokens) return false;
  return !(last.code_before.size() == 1 && !find_signatures(last.code_before, lang).empty());
}

CloneQuery clone_query(const Edit& last, const InvokerConfig& cfg) {
  CloneQuery q{last.code_before, cfg.clone_threshold, last.file, last.new_span()};
  q.same_file_only = cfg.clone_same_file;
  return q;
}

// Drops hits on lines some earlier edit already changed.
template <class Hit, class FileOf, class SpanOf>
void drop_edited(std::vector<Hit>& hits, std::span<const Edit> priors, const Edit& last, FileOf file_of, SpanOf span_of) {
  std::vector<Edit> all(priors.begin(), priors.end());
  all.push_back(last);
  const auto spans = current_spans(all);
  std::erase_if(hits, [&](const Hit& h) {
    for (std::size_t i = 0; i + 1 < all.size(); ++i)
      if (spans[i] && file_of(h) == all[i].file && span_of(h).intersects(*spans[i])) return true;
    return false;
  });
}

void settle(CompositionDecision& d) {
  d.invoked.clear();
  for (auto [type, score] : d.scores)
    if (type != CompositionType::Diagnose && score > 0.0 && score >= d.threshold) d.invoked.insert(type);
}

bool overlaps(const ToolEditCandidate& c, const std::string& file, const LineSpan& span) {
  if (c.file != file) return false;
  const LineSpan probe = c.span.empty() ? LineSpan{c.span.start, c.span.start} : c.span;
  return probe.intersects(span);
}

// Calls (name plus argument tokens) written in `lines`.
std::vector<std::pair<Position, std::string>> calls(std::span<const std::string> lines, Language lang) {
  const auto toks = tokenize(lines, lang);
  std::vector<std::pair<Position, std::string>> out;
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::Identifier || toks[i + 1].text != "(" || toks[i + 1].line != toks[i].line) continue;
    const std::size_t close = matching_close(toks, i + 1);
    std::string text;
    for (std::size_t k = i; k <= close && k < toks.size(); ++k) text += toks[k].text + " ";
    out.emplace_back(Position{toks[i].line, toks[i].column}, std::move(text));
  }
  return out;
}

// The first call whose arguments the edit changed (line relative to code_after).
std::optional<Position> changed_call(const Edit& edit, Language lang) {
  std::set<std::string> before;
  for (auto& [pos, text] : calls(edit.code_before, lang)) before.insert(text);
  for (auto& [pos, text] : calls(edit.code_after, lang))
    if (!before.contains(text)) return pos;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(CompositionType t) noexcept {
  for (auto [type, name] : kNames)
    if (type == t) return name;
  return "?";
}

std::optional<CompositionType> composition_from_string(std::string_view name) noexcept {
  for (auto [type, n] : kNames)
    if (n == name) return type;
  return std::nullopt;
}

std::optional<RenameInfo> detect_rename(const Edit& edit, Language lang) {
  // Line counts must agree so reverting the rename never shifts lines.
  if (edit.is_noop() || edit.code_before.size() != edit.code_after.size()) return std::nullopt;
  const auto before = tokenize(edit.code_before, lang);
  const auto after = tokenize(edit.code_after, lang);
  if (before.size() != after.size()) return std::nullopt;

  std::optional<RenameInfo> info;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto& b = before[i];
    const auto& a = after[i];
    if (b.same_element(a)) continue;
    if (b.kind != TokenKind::Identifier || a.kind != TokenKind::Identifier) return std::nullopt;
    if (!info) {
      info = RenameInfo{b.text, a.text, false, {edit.line_start + b.line - 1, b.column},
                        {edit.line_start + a.line - 1, a.column}};
    } else if (info->old_name != b.text || info->new_name != a.text) {
      return std::nullopt;
    }
    const bool call_or_def = (i + 1 < after.size() && after[i + 1].text == "(" && after[i + 1].line == a.line) ||
                             (i > 0 && is_function_introducer(before[i - 1].text));
    info->function = info->function || call_or_def;
  }
  return info;
}

std::vector<Signature> find_signatures(std::span<const std::string> lines, Language lang) {
  const auto toks = tokenize(lines, lang);
  std::vector<Signature> out;
  auto take = [&](std::size_t name_at) {
    const std::size_t open = name_at + 1;
    const std::size_t close = matching_close(toks, open);
    Signature s;
    s.name = toks[name_at].text;
    s.line = toks[name_at].line - 1;
    s.column = toks[name_at].column;
    for (std::size_t k = open + 1; k < close; ++k)
      if (toks[k].kind != TokenKind::Comment) s.params.push_back(toks[k].text);
    out.push_back(std::move(s));
    return close;
  };
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    const auto& t = toks[i];
    if (t.kind == TokenKind::Keyword && is_function_introducer(t.text)) {
      std::size_t j = i + 1;
      if (lang == Language::Go && toks[j].text == "(") j = matching_close(toks, j) + 1;  // receiver
      if (j + 1 < toks.size() && toks[j].kind == TokenKind::Identifier && toks[j + 1].text == "(") i = take(j);
      continue;
    }
    if (lang == Language::Python || lang == Language::Go) continue;
    // Methods in brace languages: `type name(...) {` or `name(...): T {`.
    if (t.kind != TokenKind::Identifier || toks[i + 1].text != "(") continue;
    const bool line_start = i == 0 || toks[i - 1].line != t.line;
    const bool typed = i > 0 && toks[i - 1].line == t.line &&
                       (toks[i - 1].kind == TokenKind::Identifier || is_type_word(toks[i - 1].text) ||
                        toks[i - 1].text == ">" || toks[i - 1].text == "]");
    if (!line_start && !typed) continue;
    const std::size_t close = matching_close(toks, i + 1);
    if (close + 1 >= toks.size()) continue;
    const auto& next = toks[close + 1].text;
    if (next == "{" || next == "throws" || (next == ":" && lang != Language::Java)) i = take(i);
  }
  return out;
}

std::optional<Signature> changed_signature(const Edit& edit, Language lang) {
  if (edit.is_noop()) return std::nullopt;
  const auto before = find_signatures(edit.code_before, lang);
  for (const auto& a : find_signatures(edit.code_after, lang)) {
    for (const auto& b : before)
      if (b.name == a.name && b.params != a.params) return a;
  }
  return std::nullopt;
}

std::optional<Signature> changed_arity_call(const Edit& edit, Language lang) {
  if (edit.is_noop()) return std::nullopt;
  auto arities = [&](std::span<const std::string> lines) {
    const auto toks = tokenize(lines, lang);
    std::vector<std::pair<Signature, int>> out;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      if (toks[i].kind != TokenKind::Identifier || toks[i + 1].text != "(" || toks[i + 1].line != toks[i].line) continue;
      if (i > 0 && is_function_introducer(toks[i - 1].text)) continue;
      const std::size_t close = matching_close(toks, i + 1);
      Signature s{toks[i].text, {}, toks[i].line - 1, toks[i].column};
      int args = 0, depth = 0;
      for (std::size_t k = i + 2; k < close; ++k) {
        const auto& x = toks[k].text;
        if (x == "(" || x == "[" || x == "{") ++depth;
        if (x == ")" || x == "]" || x == "}") --depth;
        if (depth == 0 && x == ",") ++args;
        s.params.push_back(x);
      }
      if (!s.params.empty()) ++args;
      out.emplace_back(std::move(s), args);
    }
    return out;
  };
  const auto before = arities(edit.code_before);
  for (auto& [a, n] : arities(edit.code_after)) {
    bool same_name = false, same_arity = false;
    for (const auto& [b, m] : before) {
      if (b.name != a.name) continue;
      same_name = true;
      same_arity = same_arity || m == n;
    }
    if (same_name && !same_arity) return a;
  }
  return std::nullopt;
}

bool defines_function(const Project& project, const std::string& name) {
  for (const auto& path : project.paths()) {
    const auto& lines = project.file(path).lines;
    const bool mentioned = std::any_of(lines.begin(), lines.end(), [&](const std::string& l) { return l.find(name) != std::string::npos; });
    if (!mentioned) continue;
    for (const auto& s : find_signatures(lines, project.language()))
      if (s.name == name) return true;
  }
  return false;
}

std::string encode_input(const Edit& last, std::span<const Edit> priors, std::size_t token_budget) {
  auto pair = [](const Edit& e) {
    return "<BEFORE>" + join_lines(e.code_before) + "</BEFORE><AFTER>" + join_lines(e.code_after) + "</AFTER>";
  };
  auto cost = [](const Edit& e) {
    return lexical_words(join_lines(e.code_before)).size() + lexical_words(join_lines(e.code_after)).size();
  };
  std::string out = pair(last);
  std::size_t used = cost(last);
  for (auto it = priors.rbegin(); it != priors.rend(); ++it) {
    used += cost(*it);
    if (used > token_budget) break;
    out += "\n" + pair(*it);
  }
  return out;
}

double HeuristicInvoker::clone_score(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) const {
  if (ctx.clone_similarity) return *ctx.clone_similarity;
  if (!ctx.project || !clone_probe(last, lang_, cfg_)) return 0.0;
  auto hits = detect_clones(clone_query(last, cfg_), *ctx.project);
  drop_edited(hits, priors, last, [](const CloneHit& h) { return h.file; }, [](const CloneHit& h) { return h.span; });
  return hits.empty() ? 0.0 : hits.front().similarity;
}

CompositionDecision HeuristicInvoker::classify(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) {
  CompositionDecision d;
  d.threshold = cfg_.threshold;
  for (auto t : kInvokerClasses) d.scores[t] = 0.0;
  if (last.is_noop()) return d;
  attach_analysis(d, last, priors, lang_, ctx.project);
  if (d.rename) d.scores[d.rename->function ? CompositionType::FuncRename : CompositionType::VarRename] = 1.0;
  if (d.signature) d.scores[CompositionType::DefUse] = 1.0;
  d.scores[CompositionType::Clone] = clone_score(last, priors, ctx);
  settle(d);
  return d;
}

CompositionDecision BlindInvoker::classify(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) {
  CompositionDecision d;
  for (auto t : kInvokerClasses) d.scores[t] = 1.0;
  attach_analysis(d, last, priors, ctx.project ? ctx.project->language() : Language::Python, ctx.project);
  settle(d);
  return d;
}

CompositionDecision RandomInvoker::classify(const Edit& last, std::span<const Edit> priors, const InvokerContext& ctx) {
  std::mt19937_64 rng(seed_ ^ fnv1a(last.file + "\n" + encode_input(last, priors)));
  std::bernoulli_distribution coin(0.5);
  CompositionDecision d;
  for (auto t : kInvokerClasses) d.scores[t] = coin(rng) ? 1.0 : 0.0;
  attach_analysis(d, last, priors, ctx.project ? ctx.project->language() : Language::Python, ctx.project);
  settle(d);
  return d;
}

CompositionDecision ExternalInvoker::classify(const Edit& last, std::span<const Edit> priors,
                                              const InvokerContext& ctx) {
  fell_back_ = false;
  std::map<std::string, double> raw;
  try {
    if (!scorer_) throw Error(ErrorCode::BackendUnavailable, "no invoker scorer configured");
    raw = scorer_(encode_input(last, priors, cfg_.token_budget));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BackendUnavailable) throw;
    fell_back_ = true;
    return fallback_.classify(last, priors, ctx);
  }
  CompositionDecision d;
  d.threshold = cfg_.threshold;
  for (auto t : kInvokerClasses) {
    auto it = raw.find(std::string(to_string(t)));
    d.scores[t] = it == raw.end() ? 0.0 : std::clamp(it->second, 0.0, 1.0);
  }
  attach_analysis(d, last, priors, ctx.project ? ctx.project->language() : Language::Python, ctx.project);
  settle(d);
  return d;
}

std::unique_ptr<InvokerBackend> make_invoker(const std::string& name, Language lang, std::uint64_t seed,
                                             CompositionScorer scorer, InvokerConfig cfg) {
  if (name == "heuristic") return std::make_unique<HeuristicInvoker>(cfg, lang);
  if (name == "blind") return std::make_unique<BlindInvoker>();
  if (name == "random") return std::make_unique<RandomInvoker>(seed);
  if (name == "external") return std::make_unique<ExternalInvoker>(std::move(scorer), cfg, lang);
  throw Error(ErrorCode::InvalidArgument, "unknown invoker backend: " + name);
}

std::vector<ToolEditCandidate> rename_after_edit(ToolServices& tools, const Project& current, const Edit& last,
                                                 std::span<const Edit> priors, const RenameInfo& rename) {
  std::vector<Edit> all(priors.begin(), priors.end());
  all.push_back(last);
  const auto spans = current_spans(all);
  const Language lang = current.language();

  // The composition so far: every edit making the same substitution.
  std::vector<std::pair<std::string, LineSpan>> members;
  Project reverted = current;
  for (std::size_t i = all.size(); i-- > 0;) {
    if (!spans[i]) continue;
    auto r = i + 1 == all.size() ? std::optional<RenameInfo>(rename) : detect_rename(all[i], lang);
    if (!r || r->old_name != rename.old_name || r->new_name != rename.new_name) continue;
    Edit back;
    back.file = all[i].file;
    back.line_start = spans[i]->start;
    back.line_end = spans[i]->end;
    back.code_before = all[i].code_after;
    back.code_after = all[i].code_before;
    try {
      reverted = apply_edit(reverted, back);
    } catch (const Error&) {
      continue;  // later edits touched it; leave as is
    }
    members.emplace_back(all[i].file, *spans[i]);
  }

  std::vector<ToolEditCandidate> raw;
  tools.sync(reverted);
  try {
    raw = tools.rename(last.file, rename.before, rename.new_name);
  } catch (const Error& e) {
    tools.sync(current);
    if (e.code() == ErrorCode::ServerError || e.code() == ErrorCode::Timeout) return {};
    throw;
  }
  tools.sync(current);

  std::vector<ToolEditCandidate> out;
  for (auto& c : raw) {
    const bool inside = std::any_of(members.begin(), members.end(),
                                    [&](const auto& m) { return c.file == m.first && c.span.intersects(m.second); });
    if (inside) continue;
    if (c.replacement && current.has_file(c.file)) {
      const auto& lines = current.file(c.file).lines;
      if (c.span.end <= static_cast<int>(lines.size()) &&
          std::equal(c.replacement->begin(), c.replacement->end(), lines.begin() + (c.span.start - 1)) &&
          static_cast<int>(c.replacement->size()) == c.span.length())
        continue;  // already renamed
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ToolEditCandidate> fire_services(const CompositionDecision& decision, ToolServices& tools,
                                             const Project& current, const Edit& last, std::span<const Edit> priors,
                                             const InvokerConfig& cfg) {
  std::vector<ToolEditCandidate> out;
  tools.sync(current);
  auto append = [&](std::vector<ToolEditCandidate> more) {
    for (auto& c : more) out.push_back(std::move(c));
  };
  if ((decision.fires(CompositionType::VarRename) || decision.fires(CompositionType::FuncRename)) && decision.rename)
    append(rename_after_edit(tools, current, last, priors, *decision.rename));
  if (decision.fires(CompositionType::DefUse) && decision.signature) {
    const Position pos{last.line_start + decision.signature->line, decision.signature->column};
    try {
      append(tools.references(last.file, pos));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ServerError && e.code() != ErrorCode::Timeout) throw;
    }
  }
  if (decision.fires(CompositionType::Clone) && clone_probe(last, current.language(), cfg)) {
    auto hits = tools.clones(clone_query(last, cfg));
    drop_edited(hits, priors, last, [](const ToolEditCandidate& c) { return c.file; },
                [](const ToolEditCandidate& c) { return c.span; });
    append(std::move(hits));
  }
  return out;
}

std::vector<ToolEditCandidate> confirm_invocation(const CompositionDecision& decision,
                                                  std::vector<ToolEditCandidate> results, const Project& current,
                                                  const Edit& last, std::span<const Edit> priors) {
  const Language lang = current.language();

  // Lines (current coordinates) that priors outside the rename composition changed.
  std::vector<std::pair<std::string, LineSpan>> touched;
  {
    std::vector<Edit> all(priors.begin(), priors.end());
    all.push_back(last);
    const auto spans = current_spans(all);
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
      if (!spans[i] || spans[i]->empty()) continue;
      if (decision.rename) {
        auto r = detect_rename(all[i], lang);
        if (r && r->old_name == decision.rename->old_name && r->new_name == decision.rename->new_name) continue;
      }
      touched.emplace_back(all[i].file, *spans[i]);
    }
  }
  const bool usage_change =
      decision.rename && std::any_of(results.begin(), results.end(), [&](const ToolEditCandidate& c) {
        if (c.source != ToolService::Rename) return false;
        return std::any_of(touched.begin(), touched.end(),
                           [&](const auto& t) { return c.file == t.first && c.span.intersects(t.second); });
      });

  auto call_or_def_site = [&](const ToolEditCandidate& c) {
    if (!decision.signature || !current.has_file(c.file)) return false;
    const auto& lines = current.file(c.file).lines;
    if (c.span.start < 1 || c.span.start > static_cast<int>(lines.size())) return false;
    const auto toks = tokenize(std::span(lines).subspan(c.span.start - 1, 1), lang);
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      if (toks[i].text != decision.signature->name || toks[i + 1].text != "(") continue;
      if (c.column_start < 0 || c.column_start == toks[i].column) return true;
    }
    return false;
  };

  std::vector<ToolEditCandidate> out;
  for (auto& c : results) {
    switch (c.source) {
      case ToolService::Rename:
        if (usage_change || !decision.rename) continue;
        break;
      case ToolService::References:
      case ToolService::Definition:
        if (c.file == last.file && c.span.intersects(last.new_span())) continue;
        if (!call_or_def_site(c)) continue;
        break;
      default:
        break;
    }
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const ToolEditCandidate& a, const ToolEditCandidate& b) {
    const bool ac = a.source == ToolService::Clone, bc = b.source == ToolService::Clone;
    if (ac != bc) return bc;  // clone results after the others
    if (ac && a.score != b.score) return a.score > b.score;
    return false;
  });
  return out;
}

InvokerSample build_invoker_sample(const CommitRecord& commit, const Project& pre_commit, ToolServices& tools,
                                   const InvokerBenchConfig& cfg) {
  const std::size_t n = commit.hunks.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "commit " + commit.commit_id + " has no hunks");
  std::mt19937_64 rng(cfg.seed ^ fnv1a(commit.repo_id + ":" + commit.commit_id));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t bg = std::min(cfg.max_backgrounds, n - 1);

  // Backgrounds first, H_t last, each rebased past the ones applied before it.
  std::vector<Edit> applied;
  Project project = pre_commit;
  for (std::size_t k = 0; k <= bg; ++k) {
    const std::size_t idx = k == bg ? order[0] : order[k + 1];
    std::optional<Edit> e = commit.hunks[idx].to_edit();
    for (const auto& prev : applied)
      if (e) e = rebase_edit(*e, prev);
    if (!e) throw Error(ErrorCode::ReplayDesync, "overlapping hunks in " + commit.commit_id);
    try {
      project = apply_edit(project, *e);
    } catch (const Error& err) {
      throw Error(ErrorCode::CheckoutFailed, commit.commit_id + ": " + err.what());
    }
    e->timestamp = k + 1;
    applied.push_back(std::move(*e));
  }

  std::vector<std::pair<std::string, LineSpan>> remaining;
  for (std::size_t k = bg + 1; k < n; ++k) {
    std::optional<Edit> e = commit.hunks[order[k]].to_edit();
    for (const auto& prev : applied)
      if (e) e = rebase_edit(*e, prev);
    if (e) remaining.emplace_back(e->file, e->location());
  }

  InvokerSample s;
  s.repo_id = commit.repo_id;
  s.commit_id = commit.commit_id;
  s.target = applied.back();
  s.backgrounds.assign(applied.begin(), applied.end() - 1);
  s.encoded = encode_input(s.target, s.backgrounds, cfg.invoker.token_budget);

  const Language lang = pre_commit.language();
  const Edit& t = s.target;
  tools.sync(project);
  std::vector<ToolEditCandidate> clone_hits;
  if (clone_probe(t, lang, cfg.invoker)) {
    clone_hits = tools.clones(clone_query(t, cfg.invoker));
    drop_edited(clone_hits, s.backgrounds, t, [](const ToolEditCandidate& c) { return c.file; },
                [](const ToolEditCandidate& c) { return c.span; });
    if (!clone_hits.empty()) s.clone_similarity = clone_hits.front().score;
  }
  if (n < 4) return s;  // too small to leave a composition behind

  auto hits_remaining = [&](const std::vector<ToolEditCandidate>& found) {
    return std::any_of(found.begin(), found.end(), [&](const ToolEditCandidate& c) {
      return std::any_of(remaining.begin(), remaining.end(), [&](const auto& r) { return overlaps(c, r.first, r.second); });
    });
  };

  if (auto rename = detect_rename(t, lang)) {
    if (!rename->function) rename->function = defines_function(project, rename->old_name) || defines_function(project, rename->new_name);
    if (hits_remaining(rename_after_edit(tools, project, t, s.backgrounds, *rename)))
      s.labels.insert(rename->function ? CompositionType::FuncRename : CompositionType::VarRename);
  }
  std::optional<Position> at;
  if (auto sig = changed_signature(t, lang)) {
    at = Position{t.line_start + sig->line, sig->column};
  } else if (auto call = changed_call(t, lang)) {
    at = Position{t.line_start + call->line - 1, call->column};
  }
  if (at) {
    std::vector<ToolEditCandidate> refs;
    try {
      refs = tools.references(t.file, *at);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ServerError && e.code() != ErrorCode::Timeout) throw;
    }
    std::erase_if(refs, [&](const ToolEditCandidate& c) { return c.file == t.file && c.span.intersects(t.new_span()); });
    if (hits_remaining(refs)) s.labels.insert(CompositionType::DefUse);
  }
  if (hits_remaining(clone_hits)) s.labels.insert(CompositionType::Clone);
  return s;
}

std::vector<InvokerSample> build_invoker_benchmark(const std::vector<CommitRecord>& commits,
                                                   const std::function<Project(const CommitRecord&)>& checkout,
                                                   ToolServices& tools, const InvokerBenchConfig& cfg) {
  std::vector<InvokerSample> out;
  out.reserve(commits.size());
  for (const auto& c : commits) {
    if (c.hunks.empty()) continue;
    out.push_back(build_invoker_sample(c, checkout(c), tools, cfg));
  }
  return out;
}

InvokerMetrics score_predictions(std::span<const std::set<CompositionType>> predicted,
                                 std::span<const std::set<CompositionType>> gold) {
  if (predicted.size() != gold.size()) throw Error(ErrorCode::LengthMismatch, "prediction and gold counts differ");
  InvokerMetrics m;
  m.samples = gold.size();
  for (auto t : kInvokerClasses) {
    std::size_t tp = 0;
    ClassMetrics c;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool p = predicted[i].contains(t), g = gold[i].contains(t);
      c.predicted += p;
      c.positives += g;
      tp += p && g;
    }
    c.precision = c.predicted ? 100.0 * static_cast<double>(tp) / static_cast<double>(c.predicted) : 0.0;
    c.recall = c.positives ? 100.0 * static_cast<double>(tp) / static_cast<double>(c.positives) : 0.0;
    c.f1 = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    m.per_class[t] = c;
    m.macro.precision += c.precision / kInvokerClasses.size();
    m.macro.recall += c.recall / kInvokerClasses.size();
    m.macro.f1 += c.f1 / kInvokerClasses.size();
    m.macro.positives += c.positives;
    m.macro.predicted += c.predicted;
  }
  return m;
}

InvokerMetrics evaluate_invoker(std::span<const InvokerSample> samples, InvokerBackend& backend) {
  std::vector<std::set<CompositionType>> predicted, gold;
  for (const auto& s : samples) {
    InvokerContext ctx;
    ctx.clone_similarity = s.clone_similarity;
    predicted.push_back(backend.classify(s.target, s.backgrounds, ctx).invoked);
    gold.push_back(s.labels);
  }
  return score_predictions(predicted, gold);
}

namespace {

json label_list(const std::set<CompositionType>& labels) {
  json arr = json::array();
  for (auto t : labels) arr.push_back(to_string(t));
  return arr;
}

json class_json(const ClassMetrics& c) {
  return {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"positives", c.positives},
          {"predicted", c.predicted}};
}

}  // namespace

void to_json(json& j, const InvokerSample& s) {
  j = {{"repo_id", s.repo_id},       {"commit_id", s.commit_id}, {"target", s.target},
       {"backgrounds", s.backgrounds}, {"labels", label_list(s.labels)}, {"encoded", s.encoded},
       {"clone_similarity", s.clone_similarity}};
}

void from_json(const json& j, InvokerSample& s) {
  s.repo_id = j.value("repo_id", "");
  s.commit_id = j.value("commit_id", "");
  s.target = j.at("target").get<Edit>();
  s.backgrounds = j.value("backgrounds", std::vector<Edit>{});
  s.labels.clear();
  for (const auto& l : j.value("labels", json::array())) {
    auto t = composition_from_string(l.get<std::string>());
    if (!t || *t == CompositionType::Diagnose) throw Error(ErrorCode::InvalidArgument, "bad invoker label: " + l.dump());
    s.labels.insert(*t);
  }
  s.encoded = j.value("encoded", "");
  s.clone_similarity = j.value("clone_similarity", 0.0);
}

void to_json(json& j, const InvokerMetrics& m) {
  j = {{"samples", m.samples}, {"macro", class_json(m.macro)}, {"per_class", json::object()}};
  for (const auto& [t, c] : m.per_class) j["per_class"][std::string(to_string(t))] = class_json(c);
}

void to_json(json& j, const CompositionDecision& d) {
  j = {{"threshold", d.threshold}, {"scores", json::object()}, {"invoked", label_list(d.invoked)}};
  for (const auto& [t, s] : d.scores) j["scores"][std::string(to_string(t))] = s;
  if (d.rename) j["rename"] = {{"old", d.rename->old_name}, {"new", d.rename->new_name}, {"function", d.rename->function}};
  if (d.signature) j["signature"] = {{"name", d.signature->name}, {"params", d.signature->params}};
}

}  // namespace nextedit
