#include <unistd.h>

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "nextedit/dataset.hpp"
#include "nextedit/process.hpp"
#include "nextedit/serialize.hpp"
#include "nextedit/server.hpp"
#include "nextedit/simulation.hpp"

using namespace nextedit;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kLanguages{"python", "go", "java", "javascript", "typescript"};

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> argv;
  for (std::string w; in >> w;) argv.push_back(w);
  return argv;
}

JsonScorer scorer(const std::string& command) { return command.empty() ? JsonScorer{} : command_scorer(split_command(command)); }

// The invoker's external model gets {"input": encoded} and answers with a
// probability per class name.
CompositionScorer composition_scorer(const std::string& command) {
  if (command.empty()) return {};
  return [s = scorer(command)](const std::string& encoded) {
    return s(json{{"input", encoded}}).get<std::map<std::string, double>>();
  };
}

// `-` is stdout.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  write_file(path, text);
}

std::string jsonl(const std::vector<json>& rows) {
  std::string s;
  for (const auto& r : rows) s += r.dump() + "\n";
  return s;
}

template <typename T>
std::vector<json> rows_of(const std::vector<T>& items) {
  return {items.begin(), items.end()};
}

std::vector<CommitRecord> read_records(const std::string& path) {
  std::vector<CommitRecord> out;
  for (const auto& row : read_jsonl(path)) out.push_back(row.get<CommitRecord>());
  return out;
}

MessageHook message_hook(const std::string& command) {
  if (command.empty()) return {};
  return [argv = split_command(command)](const std::string& cleaned) -> std::optional<std::string> {
    auto r = run_process(argv, {}, cleaned);
    while (!r.out.empty() && (r.out.back() == '\n' || r.out.back() == '\r')) r.out.pop_back();
    if (r.status != 0 || r.out.empty()) return std::nullopt;
    return r.out;
  };
}

// Language server options shared by the subcommands that fire tools.
struct ToolOptions {
  bool no_lsp = false;
  std::string lsp_config;

  void add(CLI::App* app) {
    app->add_flag("--no-lsp", no_lsp, "Use the lexical stand-in instead of a language server");
    app->add_option("--lsp-config", lsp_config, "JSON file of per-language server commands")->check(CLI::ExistingFile);
  }
  json config() const { return lsp_config.empty() ? json::object() : json::parse(read_file(lsp_config)); }

  std::unique_ptr<ToolServices> make(Language lang, const fs::path& root) const {
    if (no_lsp) return std::make_unique<LexicalToolServices>();
    std::optional<lsp::ServerConfig> chosen;
    auto configured = lsp::load_server_configs(config(), root);
    if (auto it = configured.find(lang); it != configured.end()) chosen = it->second;
    return make_tool_services(lang, root, chosen);
  }
};

// Where a language server sees the project; never the user's tree.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("nextedit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

Project load_session_project(const std::string& root, Language lang, const std::string& session_path, EditSession& session) {
  session.project_root = root;
  if (!session_path.empty())
    for (auto& e : read_edits_jsonl(session_path)) session.append(std::move(e));
  return Project::load(root, lang);
}

LineSpan parse_span(const std::string& text) {
  const auto dash = text.find('-');
  try {
    if (dash == std::string::npos) {
      const int line = std::stoi(text);
      return {line, line};
    }
    return {std::stoi(text.substr(0, dash)), std::stoi(text.substr(dash + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad line range " + text);
  }
}

std::vector<InvokerSample> invoker_samples(const std::vector<CommitRecord>& records,
                                           const std::map<std::string, fs::path>& repos, Language lang,
                                           const ToolOptions& tools_opt, std::uint64_t seed) {
  TempDir server_root("invoker");
  auto tools = tools_opt.make(lang, server_root.path);
  InvokerBenchConfig cfg;
  cfg.seed = seed;
  return build_invoker_benchmark(
      records,
      [&](const CommitRecord& r) {
        auto it = repos.find(r.repo_id);
        if (it == repos.end()) throw Error(ErrorCode::RepoUnreadable, "no --repo given for " + r.repo_id);
        return checkout_project(it->second, r.parent_id, r.language);
      },
      *tools, cfg);
}

std::map<std::string, fs::path> repo_index(const std::vector<std::string>& repos) {
  std::map<std::string, fs::path> out;
  for (const auto& r : repos) {
    const auto p = fs::weakly_canonical(r);
    out[p.filename().string()] = p;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Next-edit prediction: mining, representation, locating, generating and replay"};
  app.require_subcommand(1);
  std::string lang_name = "python";
  auto add_lang = [&](CLI::App* sub) {
    sub->add_option("--lang", lang_name, "Source language")->check(CLI::IsMember(kLanguages));
  };

  // mine
  auto* mine = app.add_subcommand("mine", "Mine multi-hunk commits from local clones into JSONL records");
  std::vector<std::string> repos;
  std::string out_path;
  MineFilters filters;
  bool mixed = false;
  std::string message_filter;
  mine->add_option("--repo", repos, "Repository directory (repeatable)")->required()->check(CLI::ExistingDirectory);
  add_lang(mine);
  mine->add_option("--out", out_path, "Output JSONL (default stdout)");
  mine->add_option("--min-hunks", filters.min_hunks)->capture_default_str();
  mine->add_option("--max-hunks", filters.max_hunks)->capture_default_str();
  mine->add_option("--threads", filters.threads, "0 uses every core")->capture_default_str();
  mine->add_flag("--mixed-language", mixed, "Keep commits that also touch other languages");
  mine->add_option("--message-filter", message_filter,
                   "Command reading a cleaned message on stdin; empty output or failure drops the commit");

  // build-dataset
  auto* build = app.add_subcommand("build-dataset", "Split mined records by repository and write task samples");
  std::string task, records_path;
  std::uint64_t seed = 0;
  WindowConfig windows;
  std::size_t max_priors = 3;
  ToolOptions tool_opts;
  build->add_option("--task", task)->required()->check(CLI::IsMember({"locator", "generator", "invoker"}));
  build->add_option("--records", records_path, "JSONL from `mine`")->required()->check(CLI::ExistingFile);
  build->add_option("--out", out_path, "Output directory")->required();
  build->add_option("--seed", seed)->capture_default_str();
  build->add_option("--window-size", windows.size)->capture_default_str();
  build->add_option("--stride", windows.stride)->capture_default_str();
  build->add_option("--max-priors", max_priors)->capture_default_str();
  build->add_option("--repo", repos, "Repository directories, needed by the invoker task")->check(CLI::ExistingDirectory);
  tool_opts.add(build);

  // represent
  auto* represent = app.add_subcommand("represent", "Enrich a unified diff read on stdin");
  bool as_json = false;
  add_lang(represent);
  represent->add_flag("--json", as_json, "Emit labels and content as JSON");

  // invoker-bench
  auto* bench = app.add_subcommand("invoker-bench", "Build the composition-invocation benchmark from repositories");
  bench->add_option("--repo", repos)->required()->check(CLI::ExistingDirectory);
  add_lang(bench);
  bench->add_option("--out", out_path, "Output JSONL (default stdout)");
  bench->add_option("--seed", seed)->capture_default_str();
  tool_opts.add(bench);

  // invoker-eval
  auto* inv_eval = app.add_subcommand("invoker-eval", "Score an invoker backend on benchmark samples");
  std::string samples_path, inv_backend = "heuristic", command;
  InvokerConfig inv_cfg;
  inv_eval->add_option("--samples", samples_path)->required()->check(CLI::ExistingFile);
  inv_eval->add_option("--backend", inv_backend)
      ->check(CLI::IsMember({"heuristic", "blind", "random", "external"}))
      ->capture_default_str();
  inv_eval->add_option("--command", command, "External model command (JSON on stdin and stdout)");
  inv_eval->add_option("--threshold", inv_cfg.threshold)->capture_default_str();
  inv_eval->add_option("--seed", seed)->capture_default_str();
  add_lang(inv_eval);

  // locate
  auto* locate = app.add_subcommand("locate", "Rank windows of a project likely to need the next edit");
  std::string project_dir, session_path, prompt;
  std::size_t top = 20;
  std::string loc_backend = "clone_baseline", gen_backend = "template";
  locate->add_option("--project", project_dir)->required()->check(CLI::ExistingDirectory);
  locate->add_option("--session", session_path, "JSONL of prior edits, already applied to the project")
      ->check(CLI::ExistingFile);
  locate->add_option("--backend", loc_backend)->check(CLI::IsMember({"clone_baseline", "external"}))->capture_default_str();
  locate->add_option("--command", command, "External model command");
  locate->add_option("--prompt", prompt);
  locate->add_option("--top", top)->capture_default_str();
  add_lang(locate);

  // generate
  auto* generate = app.add_subcommand("generate", "Generate candidate rewrites for a location");
  std::string file, lines;
  int candidates = 10;
  generate->add_option("--project", project_dir)->required()->check(CLI::ExistingDirectory);
  generate->add_option("--session", session_path)->check(CLI::ExistingFile);
  generate->add_option("--file", file)->required();
  generate->add_option("--lines", lines, "Lines to rewrite, e.g. 12-14")->required();
  generate->add_option("--backend", gen_backend)->check(CLI::IsMember({"template", "external"}))->capture_default_str();
  generate->add_option("--command", command);
  generate->add_option("--prompt", prompt);
  generate->add_option("--candidates", candidates)->capture_default_str();
  add_lang(generate);

  // step
  auto* step_cmd = app.add_subcommand("step", "One round of next-edit prediction after a session of edits");
  std::string invoker_name = "heuristic", locator_name = "clone_baseline", generator_name = "template";
  std::string invoker_command, locator_command, generator_command;
  auto add_backends = [&](CLI::App* sub) {
    sub->add_option("--backend-invoker", invoker_name)
        ->check(CLI::IsMember({"heuristic", "blind", "random", "external", "none"}))
        ->capture_default_str();
    sub->add_option("--backend-locator", locator_name)
        ->check(CLI::IsMember({"clone_baseline", "external", "none"}))
        ->capture_default_str();
    sub->add_option("--backend-generator", generator_name)
        ->check(CLI::IsMember({"template", "external", "none"}))
        ->capture_default_str();
    sub->add_option("--invoker-command", invoker_command);
    sub->add_option("--locator-command", locator_command);
    sub->add_option("--generator-command", generator_command);
  };
  step_cmd->add_option("--project", project_dir)->required()->check(CLI::ExistingDirectory);
  step_cmd->add_option("--session", session_path)->required()->check(CLI::ExistingFile);
  step_cmd->add_option("--prompt", prompt);
  add_lang(step_cmd);
  add_backends(step_cmd);
  tool_opts.add(step_cmd);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Replay commits with a virtual programmer and report MR@K");
  std::vector<std::string> commits;
  std::string trace_path;
  bool timing = false;
  unsigned jobs = 1;
  simulate->add_option("--repos,--repo", repos)->required()->check(CLI::ExistingDirectory);
  simulate->add_option("--commits", commits, "Commits to replay (single repository); default: every mined commit");
  simulate->add_option("--seed", seed)->capture_default_str();
  simulate->add_option("--out", out_path, "Report JSON (default stdout)");
  simulate->add_option("--trace", trace_path, "Per-step JSONL trace");
  simulate->add_flag("--timing", timing, "Include latencies in the report");
  simulate->add_option("--jobs", jobs, "Commits replayed in parallel")->capture_default_str();
  add_lang(simulate);
  add_backends(simulate);
  tool_opts.add(simulate);

  // serve
  auto* serve = app.add_subcommand("serve", "Newline-delimited JSON-RPC session server on stdin/stdout");
  add_backends(serve);
  serve->add_option("--seed", seed)->capture_default_str();
  tool_opts.add(serve);

  CLI11_PARSE(app, argc, argv);

  try {
    const Language lang = language_from_string(lang_name);

    if (*mine) {
      filters.language_pure = !mixed;
      std::vector<json> rows;
      for (const auto& r : repos)
        for (auto& rec : mine_commits(r, lang, filters, message_hook(message_filter))) rows.push_back(rec);
      std::cerr << rows.size() << " commits\n";
      emit(out_path, jsonl(rows));
      return 0;
    }

    if (*build) {
      const auto records = read_records(records_path);
      std::vector<std::string> ids;
      for (const auto& r : records) ids.push_back(r.repo_id);
      const auto split = split_by_repo(ids, seed);
      std::map<std::string, std::string> part_of;
      for (const auto& [name, part] : {std::pair{"train", &split.train}, {"valid", &split.valid}, {"test", &split.test}})
        for (const auto& id : *part) part_of[id] = name;

      std::map<std::string, std::vector<json>> parts{{"train", {}}, {"valid", {}}, {"test", {}}};
      auto place = [&](const std::string& repo_id, json row) { parts[part_of.at(repo_id)].push_back(std::move(row)); };
      if (task == "locator") {
        for (auto& s : build_locator_dataset(records, windows, max_priors)) place(s.repo_id, s);
      } else if (task == "generator") {
        for (auto& s : build_generator_dataset(records, {}, max_priors)) place(s.repo_id, s);
      } else {
        for (auto& s : invoker_samples(records, repo_index(repos), lang, tool_opts, seed)) place(s.repo_id, s);
      }
      fs::create_directories(out_path);
      json manifest = {{"task", task},
                       {"seed", seed},
                       {"records", records_path},
                       {"split", split},
                       {"window", {{"size", windows.size}, {"stride", windows.stride}}},
                       {"max_priors", max_priors},
                       {"counts", json::object()}};
      for (const auto& [name, rows] : parts) {
        write_jsonl(fs::path(out_path) / (name + ".jsonl"), rows);
        manifest["counts"][name] = rows.size();
      }
      write_file(fs::path(out_path) / "manifest.json", manifest.dump(2) + "\n");
      std::cerr << manifest["counts"].dump() << "\n";
      return 0;
    }

    if (*represent) {
      const std::string diff{std::istreambuf_iterator<char>(std::cin), {}};
      json out = json::array();
      std::string text;
      for (const auto& h : parse_unified_diff(diff)) {
        const auto e = enrich(h, lang);
        const std::string encoding = render_enriched(e);
        if (as_json) {
          json row = {{"file", h.file}, {"old_span", h.old_span}, {"new_span", h.new_span}, {"encoding", encoding}};
          row["inline"] = json::array();
          row["inter"] = json::array();
          for (auto l : e.inline_labels) row["inline"].push_back(tag(l));
          for (auto l : e.inter_labels) row["inter"].push_back(tag(l));
          out.push_back(std::move(row));
        } else {
          text += "# " + h.file + ":" + std::to_string(h.old_span.start) + "\n" + encoding;
          if (!encoding.ends_with('\n')) text += '\n';
        }
      }
      std::cout << (as_json ? out.dump(2) + "\n" : text);
      return 0;
    }

    if (*bench) {
      std::vector<CommitRecord> records;
      for (const auto& r : repos)
        for (auto& rec : mine_commits(r, lang)) records.push_back(std::move(rec));
      const auto samples = invoker_samples(records, repo_index(repos), lang, tool_opts, seed);
      std::map<std::string, int> positives;
      for (const auto& s : samples)
        for (auto c : s.labels) ++positives[std::string(to_string(c))];
      std::cerr << samples.size() << " samples " << json(positives).dump() << "\n";
      emit(out_path, jsonl(rows_of(samples)));
      return 0;
    }

    if (*inv_eval) {
      std::vector<InvokerSample> samples;
      for (const auto& row : read_jsonl(samples_path)) samples.push_back(row.get<InvokerSample>());
      auto invoker = make_invoker(inv_backend, lang, seed, composition_scorer(command), inv_cfg);
      const auto metrics = evaluate_invoker(samples, *invoker);
      std::cout << json(metrics).dump(2) << "\n";
      return 0;
    }

    if (*locate) {
      EditSession session;
      const Project project = load_session_project(project_dir, lang, session_path, session);
      if (!prompt.empty()) session.prompt = prompt;
      if (session.prior_edits.empty()) throw Error(ErrorCode::InvalidArgument, "locate needs at least one prior edit");
      auto locator = make_locator(loc_backend, scorer(command));
      StepConfig cfg;
      cfg.max_recommendations = top;
      const auto result = step(session, project, {nullptr, nullptr, locator.get(), nullptr}, cfg);
      const auto ranks = competition_ranks(result.recommendations);
      json out = json::array();
      for (std::size_t i = 0; i < result.recommendations.size(); ++i) {
        const auto& r = result.recommendations[i];
        out.push_back({{"file", r.file},
                       {"span", r.span},
                       {"window", r.window.span},
                       {"labels", r.labels},
                       {"score", r.confidence},
                       {"rank", ranks[i]}});
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*generate) {
      EditSession session;
      const Project project = load_session_project(project_dir, lang, session_path, session);
      const LineSpan span = parse_span(lines);
      if (!project.has_file(file)) throw Error(ErrorCode::FileMissing, file);
      GenerationQuery q;
      q.window = window_around(project, file, span);
      q.labels = LabelSequence::unchanged(q.window.lines.size());
      for (int line = span.start; line <= span.end; ++line) {
        if (!q.window.span.contains(line)) throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(line) + " outside the file");
        q.labels.inline_labels[static_cast<std::size_t>(line - q.window.span.start)] = InlineLabel::Replace;
      }
      if (!prompt.empty()) q.prompt = prompt;
      q.priors = select_prior_edits(q.window, session.prior_edits);
      auto gen = make_generator(gen_backend, scorer(command));
      const auto cands = gen->generate(q, candidates);
      json out = {{"file", file}, {"span", span}, {"window", q.window.span}, {"candidates", cands}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    auto make_engine_parts = [&](Language l, std::uint64_t s) {
      struct Parts {
        std::unique_ptr<InvokerBackend> invoker;
        std::unique_ptr<LocatorBackend> locator;
        std::unique_ptr<GeneratorBackend> generator;
      } p;
      if (invoker_name != "none") p.invoker = make_invoker(invoker_name, l, s, composition_scorer(invoker_command));
      if (locator_name != "none") p.locator = make_locator(locator_name, scorer(locator_command));
      if (generator_name != "none") p.generator = make_generator(generator_name, scorer(generator_command));
      return p;
    };

    if (*step_cmd) {
      EditSession session;
      const Project project = load_session_project(project_dir, lang, session_path, session);
      if (!prompt.empty()) session.prompt = prompt;
      if (session.prior_edits.empty()) throw Error(ErrorCode::InvalidArgument, "step needs at least one prior edit");
      auto parts = make_engine_parts(lang, seed);
      TempDir server_root("step");
      auto tools = tool_opts.make(lang, server_root.path);
      const auto result =
          step(session, project, {parts.invoker.get(), tools.get(), parts.locator.get(), parts.generator.get()});
      json out = {{"recommendations", ranked_json(result.recommendations, result.recommendations.size())},
                  {"tools", tools->name()}};
      if (result.decision) out["decision"] = *result.decision;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*simulate) {
      struct Job {
        fs::path repo;
        std::string commit;
      };
      std::vector<Job> work;
      if (!commits.empty()) {
        if (repos.size() != 1) throw Error(ErrorCode::InvalidArgument, "--commits needs exactly one repository");
        for (const auto& c : commits) work.push_back({repos.front(), c});
      } else {
        for (const auto& r : repos)
          for (const auto& rec : mine_commits(r, lang)) work.push_back({r, rec.commit_id});
      }
      if (work.empty()) throw Error(ErrorCode::EmptyCorpus, "no commits to replay");

      std::vector<CommitReport> reports(work.size());
      std::vector<std::vector<json>> traces(work.size());
      std::vector<std::string> failures(work.size());
      std::atomic<std::size_t> next{0};
      SimConfig cfg;
      cfg.seed = seed;
      auto worker = [&] {
        TempDir server_root("simulate");
        auto tools = tool_opts.make(lang, server_root.path);
        for (std::size_t i; (i = next++) < work.size();) {
          try {
            // Fresh backends per commit keep results independent of --jobs.
            auto parts = make_engine_parts(lang, seed + i);
            const Engine engine{parts.invoker.get(), tools.get(), parts.locator.get(), parts.generator.get()};
            TraceSink sink;
            if (!trace_path.empty()) sink = [&traces, i](const json& j) { traces[i].push_back(j); };
            reports[i] = simulate_commit(work[i].repo, work[i].commit, lang, engine, cfg, sink);
          } catch (const std::exception& e) {
            failures[i] = e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (unsigned j = 0; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      for (std::size_t i = 0; i < work.size(); ++i)
        if (!failures[i].empty()) throw Error(ErrorCode::ReplayDesync, work[i].commit + ": " + failures[i]);

      if (!trace_path.empty()) {
        std::vector<json> rows;
        for (auto& t : traces) rows.insert(rows.end(), t.begin(), t.end());
        write_jsonl(trace_path, rows);
      }
      const auto report = aggregate(std::move(reports), seed);
      emit(out_path, report_json(report, timing).dump(2) + "\n");
      return 0;
    }

    if (*serve) {
      ServerOptions opts;
      opts.invoker = invoker_name;
      opts.invoker_command = split_command(invoker_command);
      opts.locator = locator_name;
      opts.generator = generator_name;
      opts.locator_command = split_command(locator_command);
      opts.generator_command = split_command(generator_command);
      opts.lsp = !tool_opts.no_lsp;
      opts.lsp_config = tool_opts.config();
      opts.seed = seed;
      SessionServer server(std::move(opts));
      server.serve(std::cin, std::cout);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
