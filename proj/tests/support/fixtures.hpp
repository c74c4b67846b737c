#pragma once

// Throwaway git repositories for tests: the two motivating commits, the
// simulation and invoker suites, and a randomly edited corpus.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nextedit/core.hpp"
#include "nextedit/process.hpp"
#include "nextedit/serialize.hpp"

namespace nextedit::testing {

namespace fs = std::filesystem;

struct FixtureCommit {
  std::string message;
  std::map<std::string, std::optional<std::string>> files;  // nullopt deletes
};

inline void run_git(const fs::path& dir, std::vector<std::string> args) {
  std::vector<std::string> argv{"git", "-C", dir.string(), "-c", "user.name=fixture", "-c", "user.email=f@x.invalid",
                                "-c", "commit.gpgsign=false"};
  argv.insert(argv.end(), args.begin(), args.end());
  auto r = run_process(argv, {}, {}, true);
  if (r.status != 0) throw std::runtime_error("git failed: " + r.out);
}

/// A fresh empty directory named `tag` inside a unique temp directory, so
/// the repository id (the basename) is stable across runs.
inline fs::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  std::random_device rd;
  auto dir = fs::temp_directory_path() / ("nextedit-" + std::to_string(rd()) + "-" + std::to_string(++counter)) / tag;
  fs::remove_all(dir.parent_path());
  fs::create_directories(dir);
  return dir;
}

/// Removes a directory made by scratch_dir.
inline void drop_scratch(const fs::path& dir) { fs::remove_all(dir.parent_path()); }

/// Creates `dir` as a repository holding `commits` in order. Dates are fixed
/// so that history order and commit time agree.
inline fs::path make_repo(const fs::path& dir, const std::vector<FixtureCommit>& commits) {
  fs::create_directories(dir);
  run_git(dir, {"init", "-q"});
  long when = 1700000000;
  for (const auto& c : commits) {
    for (const auto& [path, text] : c.files) {
      if (text) {
        fs::create_directories((dir / path).parent_path());
        write_file(dir / path, *text);
      } else {
        fs::remove(dir / path);
      }
    }
    const std::string date = std::to_string(when) + " +0000";
    when += 60;
    ::setenv("GIT_AUTHOR_DATE", date.c_str(), 1);
    ::setenv("GIT_COMMITTER_DATE", date.c_str(), 1);
    run_git(dir, {"add", "-A"});
    run_git(dir, {"commit", "-q", "--allow-empty", "-m", c.message});
  }
  ::unsetenv("GIT_AUTHOR_DATE");
  ::unsetenv("GIT_COMMITTER_DATE");
  return dir;
}

inline std::string head_commit(const fs::path& repo) {
  auto r = run_process({"git", "-C", repo.string(), "rev-parse", "HEAD"});
  auto s = r.out;
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

// Go executor: a changed signature, its uses and a cross-file caller

inline std::vector<FixtureCommit> chunk_window_commits() {
  const std::string window_before =
      "package executor\n"
      "\n"
      "// Chunk stores rows.\n"
      "type Chunk struct {\n"
      "\tcapacity     int\n"
      "\trequiredRows int\n"
      "}\n"
      "\n"
      "func renewWithCapacity(chk *Chunk,cap int) *Chunk {\n"
      "\tnewChk := new(Chunk)\n"
      "\tnewChk.capacity = cap\n"
      "\tnewChk.requiredRows = cap\n"
      "\treturn newChk\n"
      "}\n"
      "\n"
      "func renewChunk(chk *Chunk, newCap int, maxChunkSize int) *Chunk {\n"
      "\tif chk == nil {\n"
      "\t\treturn nil\n"
      "\t}\n"
      "\treturn renewWithCapacity(chk, newCap)\n"
      "}\n";
  const std::string row_before =
      "package chunk\n"
      "\n"
      "// Row is one row of a chunk.\n"
      "type Row struct {\n"
      "\tc   *Chunk\n"
      "\tidx int\n"
      "}\n"
      "\n"
      "// CopyConstruct copies the row into a new chunk.\n"
      "func (r Row) CopyConstruct() *Chunk {\n"
      "\tnewChk := renewWithCapacity(r.c, 1)\n"
      "\tnewChk.capacity = 1\n"
      "\treturn newChk\n"
      "}\n";
  std::string window_after = window_before;
  auto sub = [](std::string& s, const std::string& from, const std::string& to) {
    s.replace(s.find(from), from.size(), to);
  };
  sub(window_after, "func renewWithCapacity(chk *Chunk,cap int) *Chunk {",
      "func renewWithCapacity(chk *Chunk,cap,maxChunkSize int) *Chunk {");
  sub(window_after, "\tnewChk.requiredRows = cap\n", "\tnewChk.requiredRows = maxChunkSize\n");
  sub(window_after, "\treturn renewWithCapacity(chk, newCap)\n", "\treturn renewWithCapacity(chk, newCap, maxChunkSize)\n");
  std::string row_after = row_before;
  sub(row_after, "renewWithCapacity(r.c, 1)", "renewWithCapacity(r.c, 1, 1)");
  return {
      {"initial import", {{"executor/window.go", window_before}, {"util/chunk/row.go", row_before}}},
      {"executor: bound chunk size when renewing", {{"executor/window.go", window_after}, {"util/chunk/row.go", row_after}}},
  };
}

// Python sampler: one condition simplified at three cloned sites

inline std::string sampler_before() {
  return "import inspect\n"
         "\n"
         "import k_diffusion.sampling\n"
         "\n"
         "\n"
         "class KDiffusionSampler:\n"
         "    def __init__(self, funcname, sd_model):\n"
         "        self.func = getattr(k_diffusion.sampling, funcname)\n"
         "        self.model_wrap = sd_model\n"
         "\n"
         "    def sample(self, p, x, noise, steps=None):\n"
         "        sigma_sched = self.get_sigmas(p, steps)\n"
         "        extra_params_kwargs = self.initialize(p)\n"
         "        if 'sigma_min' in inspect.signature(self.func).parameters:\n"
         "            extra_params_kwargs['sigma_min'] = sigma_sched[-2]\n"
         "        if 'n' in inspect.signature(self.func).parameters:\n"
         "            extra_params_kwargs['n'] = len(sigma_sched) - 1\n"
         "        if 'sigma_sched' in inspect.signature(self.func).parameters:\n"
         "            extra_params_kwargs['sigma_sched'] = sigma_sched\n"
         "        return self.func(self.model_wrap, x, extra_args=extra_params_kwargs)\n";
}

inline std::string sampler_after() {
  std::string s = sampler_before();
  auto sub = [&](const std::string& from, const std::string& to) { s.replace(s.find(from), from.size(), to); };
  sub("        if 'sigma_min' in inspect.signature(self.func).parameters:\n",
      "        parameters = inspect.signature(self.func).parameters\n"
      "        xi = x + noise * sigma_sched[0]\n"
      "        if 'sigma_min' in parameters:\n");
  sub("        if 'n' in inspect.signature(self.func).parameters:\n", "        if 'n' in parameters:\n");
  sub("        if 'sigma_sched' in inspect.signature(self.func).parameters:\n",
      "        if 'sigma_sched' in parameters:\n");
  return s;
}

inline std::vector<FixtureCommit> sampler_commits() {
  return {
      {"initial import", {{"modules/sd_samplers_kdiffusion.py", sampler_before()}}},
      {"look up sampler parameters once", {{"modules/sd_samplers_kdiffusion.py", sampler_after()}}},
  };
}

// ------------------------------------------- constructed composition commits

enum class Composition { VarRename, FuncRename, DefUse, Clone };

namespace detail {

inline const std::vector<std::string>& words() {
  static const std::vector<std::string> w{"alpha", "beta",  "gamma", "delta", "omega", "sigma", "kappa",
                                          "theta", "lamda", "rho",   "tau",   "zeta",  "iota",  "epsilon"};
  return w;
}

inline std::string pick(std::mt19937& rng, const std::vector<std::string>& from) { return from[rng() % from.size()]; }

}  // namespace detail

/// Files of one package before and after a commit of the given kind. Every
/// member of the composition sits on its own line, separated by unchanged
/// lines, so each becomes its own hunk.
struct PackagePair {
  std::map<std::string, std::string> before, after;
  std::string message;
};

inline PackagePair composition_package(Composition kind, int id, std::mt19937& rng) {
  using detail::pick;
  const std::string pkg = "pkg" + std::to_string(id);
  const std::string n = std::to_string(id);
  const std::string w = pick(rng, detail::words());
  PackagePair p;
  p.before[pkg + "/__init__.py"] = "";
  auto sub_all = [](std::string s, const std::string& from, const std::string& to) {
    for (auto at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size())) s.replace(at, from.size(), to);
    return s;
  };
  switch (kind) {
    case Composition::VarRename: {
      const std::string old_name = "limit_" + w, new_name = "max_" + w + "_items";
      const std::string a =
          "def process_" + n + "(items):\n"
          "    " + old_name + " = len(items)\n"
          "    print(\"start " + n + "\")\n"
          "    if " + old_name + " > 10:\n"
          "        print(\"big\")\n"
          "    head = items[:" + old_name + "]\n"
          "    print(\"middle\")\n"
          "    report_" + n + "(" + old_name + ")\n"
          "    print(\"end\")\n"
          "    return head, " + old_name + "\n"
          "\n"
          "\n"
          "def report_" + n + "(value):\n"
          "    print(value)\n";
      p.before[pkg + "/a.py"] = a;
      p.after = p.before;
      p.after[pkg + "/a.py"] = sub_all(a, old_name, new_name);
      p.message = "rename " + old_name + " to " + new_name;
      break;
    }
    case Composition::FuncRename: {
      const std::string old_name = "helper_" + w + "_" + n, new_name = "double_" + w + "_" + n;
      const std::string a =
          "def " + old_name + "(x):\n"
          "    return x * 2\n"
          "\n"
          "\n"
          "def run_" + n + "(values):\n"
          "    first = " + old_name + "(values[0])\n"
          "    print(first)\n"
          "    second = " + old_name + "(values[1])\n"
          "    print(second)\n"
          "    return first + second\n";
      const std::string b =
          "from " + pkg + ".a import " + old_name + "\n"
          "\n"
          "\n"
          "def other_" + n + "(v):\n"
          "    print(\"other\")\n"
          "    return " + old_name + "(v)\n";
      p.before[pkg + "/a.py"] = a;
      p.before[pkg + "/b.py"] = b;
      p.after = p.before;
      p.after[pkg + "/a.py"] = sub_all(a, old_name, new_name);
      p.after[pkg + "/b.py"] = sub_all(b, old_name, new_name);
      p.message = "rename " + old_name + " to " + new_name;
      break;
    }
    case Composition::DefUse: {
      const std::string fn = "scale_" + w + "_" + n;
      const std::string a =
          "def " + fn + "(value):\n"
          "    return value * 3\n"
          "\n"
          "\n"
          "def use_" + n + "(values):\n"
          "    a = " + fn + "(values[0])\n"
          "    print(a)\n"
          "    b = " + fn + "(values[1])\n"
          "    print(b)\n"
          "    return a + b\n";
      const std::string b =
          "from " + pkg + ".a import " + fn + "\n"
          "\n"
          "\n"
          "def other_" + n + "(v):\n"
          "    print(\"other\")\n"
          "    return " + fn + "(v)\n";
      std::string a2 = a;
      const std::string body = "(value):\n    return value * 3";
      a2.replace(a2.find(body), body.size(), "(value, factor):\n    return value * factor");
      a2 = sub_all(a2, fn + "(values[0])", fn + "(values[0], 2)");
      a2 = sub_all(a2, fn + "(values[1])", fn + "(values[1], 4)");
      p.before[pkg + "/a.py"] = a;
      p.before[pkg + "/b.py"] = b;
      p.after = p.before;
      p.after[pkg + "/a.py"] = a2;
      p.after[pkg + "/b.py"] = sub_all(b, fn + "(v)", fn + "(v, 1)");
      p.message = "make the " + fn + " factor explicit";
      break;
    }
    case Composition::Clone: {
      std::vector<std::string> keys{"alpha", "beta", "gamma", "delta", "eta"};
      std::shuffle(keys.begin(), keys.end(), rng);
      std::string a = "import inspect\n\n\ndef configure_" + n + "(options, func):\n    kwargs = {}\n";
      std::string a2 = a + "    params = inspect.signature(func).parameters\n";
      for (std::size_t i = 0; i < keys.size(); ++i) {
        const std::string& k = keys[i];
        a += "    if '" + k + "' in inspect.signature(func).parameters:\n";
        a2 += "    if '" + k + "' in params:\n";
        const std::string body = "        kwargs['" + k + "'] = options[" + std::to_string(i) + "]\n";
        a += body;
        a2 += body;
      }
      a += "    return kwargs\n";
      a2 += "    return kwargs\n";
      p.before[pkg + "/a.py"] = a;
      p.after = p.before;
      p.after[pkg + "/a.py"] = a2;
      p.message = "look up the signature of func once in configure_" + n;
      break;
    }
  }
  return p;
}

/// Commits alternating over the four composition kinds (kinds[i] for commit
/// i), each touching its own package. The first commit only creates files.
inline std::vector<FixtureCommit> composition_commits(const std::vector<Composition>& kinds, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<FixtureCommit> commits;
  std::vector<PackagePair> pairs;
  FixtureCommit base{"initial import", {}};
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    pairs.push_back(composition_package(kinds[i], static_cast<int>(i), rng));
    for (auto& [path, text] : pairs.back().before) base.files[path] = text;
  }
  commits.push_back(std::move(base));
  for (auto& p : pairs) {
    FixtureCommit c{p.message, {}};
    for (auto& [path, text] : p.after)
      if (p.before.at(path) != text) c.files[path] = text;
    commits.push_back(std::move(c));
  }
  return commits;
}

inline std::vector<Composition> mixed_kinds(std::size_t n) {
  static constexpr Composition cycle[] = {Composition::VarRename, Composition::FuncRename, Composition::DefUse,
                                          Composition::Clone};
  std::vector<Composition> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(cycle[i % 4]);
  return out;
}

// ------------------------------------------------------ random edit corpus

namespace detail {

inline std::string statement(Language lang, std::mt19937& rng, int indent) {
  const auto& w = words();
  const std::string a = pick(rng, w), b = pick(rng, w), c = pick(rng, w);
  const std::string num = std::to_string(rng() % 100);
  std::string pad;
  if (lang == Language::Go) pad.assign(static_cast<std::size_t>(indent), '\t');
  else pad.assign(static_cast<std::size_t>(indent) * 4, ' ');
  switch (rng() % 6) {
    case 0:
      if (lang == Language::Python) return pad + a + " = " + b + " + " + num;
      if (lang == Language::Go) return pad + a + " := " + b + " + " + num;
      return pad + "let " + a + " = " + b + " + " + num + ";";
    case 1:
      if (lang == Language::Python) return pad + a + " = compute(" + b + ", " + c + ")";
      if (lang == Language::Go) return pad + a + " = compute(" + b + ", " + c + ")";
      return pad + a + " = compute(" + b + ", " + c + ");";
    case 2:
      if (lang == Language::Python) return pad + "log('" + a + "', " + b + ")";
      if (lang == Language::Go) return pad + "log(\"" + a + "\", " + b + ")";
      return pad + "log('" + a + "', " + b + ");";
    case 3:
      if (lang == Language::Python) return pad + b + ".append(" + c + "[" + num + "])";
      if (lang == Language::Go) return pad + b + " = append(" + b + ", " + c + "[" + num + "])";
      return pad + b + ".push(" + c + "[" + num + "]);";
    case 4:
      if (lang == Language::Python) return pad + "# " + a + " " + b;
      return pad + "// " + a + " " + b;
    default:
      if (lang == Language::Python) return pad + "result[" + num + "] = " + a + " * " + c;
      return pad + "result[" + num + "] = " + a + " * " + c + (lang == Language::Go ? "" : ";");
  }
}

inline Lines function_block(Language lang, std::mt19937& rng, int id) {
  Lines out;
  const std::string name = "fn_" + std::to_string(id);
  if (lang == Language::Python) out.push_back("def " + name + "(alpha, beta):");
  else if (lang == Language::Go) out.push_back("func " + name + "(alpha int, beta int) int {");
  else out.push_back("function " + name + "(alpha, beta) {");
  const int body = 4 + static_cast<int>(rng() % 6);
  for (int i = 0; i < body; ++i) out.push_back(statement(lang, rng, 1));
  if (lang == Language::Python) {
    out.push_back("    return alpha");
    out.push_back("");
  } else {
    out.push_back(lang == Language::Go ? "\treturn alpha" : "    return alpha;");
    out.push_back("}");
    out.push_back("");
  }
  return out;
}

}  // namespace detail

/// Source of a file made of `functions` random functions.
inline Lines random_source(Language lang, std::mt19937& rng, int functions) {
  Lines out;
  if (lang == Language::Go) {
    out.push_back("package corpus");
    out.push_back("");
  }
  for (int f = 0; f < functions; ++f)
    for (auto& l : detail::function_block(lang, rng, f)) out.push_back(std::move(l));
  return out;
}

/// Applies 2-6 scattered random changes (replace, insert, delete or mixed)
/// to statement lines of `lines`.
inline Lines mutate(Lines lines, Language lang, std::mt19937& rng) {
  std::vector<std::size_t> body;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.empty() || l.starts_with("def ") || l.starts_with("func ") || l.starts_with("function ") ||
        l.starts_with("package") || l == "}" || l.find("return alpha") != std::string::npos)
      continue;
    body.push_back(i);
  }
  std::shuffle(body.begin(), body.end(), rng);
  const std::size_t changes = std::min<std::size_t>(body.size(), 2 + rng() % 5);
  std::vector<std::size_t> at(body.begin(), body.begin() + static_cast<long>(changes));
  std::sort(at.rbegin(), at.rend());
  for (std::size_t i : at) {
    switch (rng() % 5) {
      case 0:  // replace
        lines[i] = detail::statement(lang, rng, 1);
        break;
      case 1:  // insert after
        lines.insert(lines.begin() + static_cast<long>(i) + 1, detail::statement(lang, rng, 1));
        break;
      case 2:  // delete
        lines.erase(lines.begin() + static_cast<long>(i));
        break;
      case 3: {  // insert before, then rewrite
        const std::string old = lines[i];
        lines[i] = detail::statement(lang, rng, 1);
        lines.insert(lines.begin() + static_cast<long>(i), detail::statement(lang, rng, 1));
        (void)old;
        break;
      }
      default: {  // rewrite two lines
        lines[i] = detail::statement(lang, rng, 1);
        if (i + 1 < lines.size() && !lines[i + 1].empty() && lines[i + 1] != "}") lines.insert(lines.begin() + static_cast<long>(i) + 1, detail::statement(lang, rng, 1));
        break;
      }
    }
  }
  return lines;
}

/// A repository of `commits` random multi-hunk commits over `files` files.
inline std::vector<FixtureCommit> random_commits(Language lang, unsigned seed, int commits, int files = 3) {
  std::mt19937 rng(seed);
  const std::string ext = lang == Language::Python ? ".py" : lang == Language::Go ? ".go" : ".js";
  std::map<std::string, Lines> state;
  FixtureCommit base{"initial import", {}};
  for (int f = 0; f < files; ++f) {
    const std::string path = "src/mod" + std::to_string(f) + ext;
    state[path] = random_source(lang, rng, 6);
    base.files[path] = join_lines(state[path]) + "\n";
  }
  std::vector<FixtureCommit> out{base};
  for (int c = 0; c < commits; ++c) {
    FixtureCommit fc{"update " + std::to_string(c) + ": adjust computations", {}};
    auto it = state.begin();
    std::advance(it, static_cast<long>(rng() % state.size()));
    it->second = mutate(it->second, lang, rng);
    fc.files[it->first] = join_lines(it->second) + "\n";
    out.push_back(std::move(fc));
  }
  return out;
}

}  // namespace nextedit::testing
