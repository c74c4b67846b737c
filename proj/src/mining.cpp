#include "nextedit/mining.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <regex>
#include <thread>

#include "nextedit/process.hpp"

namespace nextedit {

std::string git(const std::filesystem::path& repo, const std::vector<std::string>& args) {
  std::vector<std::string> argv{"git", "-C", repo.string(), "-c", "core.quotepath=off"};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessResult r;
  try {
    r = run_process(argv);
  } catch (const Error& e) {
    throw Error(ErrorCode::RepoUnreadable, e.what());
  }
  if (r.status != 0) throw Error(ErrorCode::RepoUnreadable, "git " + (args.empty() ? "" : args[0]) + " failed in " + repo.string());
  return r.out;
}

Project checkout_project(const std::filesystem::path& repo, const std::string& rev, Language lang) {
  Project project(lang);
  std::string listing;
  try {
    listing = git(repo, {"ls-tree", "-r", "-z", "--name-only", rev});
  } catch (const Error& e) {
    throw Error(ErrorCode::CheckoutFailed, e.what());
  }
  std::vector<std::string> paths;
  std::string request;
  for (std::size_t at = 0; at < listing.size();) {
    auto end = listing.find('\0', at);
    if (end == std::string::npos) end = listing.size();
    std::string path = listing.substr(at, end - at);
    at = end + 1;
    if (!is_source_file(path, lang)) continue;
    request += rev + ":" + path + "\n";
    paths.push_back(std::move(path));
  }
  if (paths.empty()) return project;
  ProcessResult r;
  try {
    r = run_process({"git", "-C", repo.string(), "cat-file", "--batch"}, {}, request);
  } catch (const Error& e) {
    throw Error(ErrorCode::CheckoutFailed, e.what());
  }
  if (r.status != 0) throw Error(ErrorCode::CheckoutFailed, "git cat-file failed for " + rev);
  // Each object: "<sha> <type> <size>\n<bytes>\n"
  std::size_t at = 0;
  for (const auto& path : paths) {
    const auto eol = r.out.find('\n', at);
    if (eol == std::string::npos) throw Error(ErrorCode::CheckoutFailed, "truncated cat-file output");
    const std::string header = r.out.substr(at, eol - at);
    const auto sp = header.rfind(' ');
    if (header.find(" missing") != std::string::npos || sp == std::string::npos)
      throw Error(ErrorCode::CheckoutFailed, path + " missing at " + rev);
    const std::size_t size = std::stoul(header.substr(sp + 1));
    project.set_file(path, std::string_view(r.out).substr(eol + 1, size));
    at = eol + 1 + size + 1;
  }
  return project;
}

std::vector<Hunk> CommitRecord::hunks_of(const std::string& file) const {
  std::vector<Hunk> out;
  for (const auto& h : hunks)
    if (h.file == file) out.push_back(h);
  return out;
}

std::string clean_message(std::string_view raw) {
  static const std::regex trailer(R"(^\s*[A-Za-z][A-Za-z-]*-by:.*$)", std::regex::icase);
  static const std::regex pr_id(R"(\s*\(#\d+\))");
  static const std::regex email(R"(<?[\w.+-]+@[\w-]+(\.[\w-]+)+>?)");
  std::string kept;
  for (const auto& line : split_lines(raw)) {
    if (std::regex_match(line, trailer)) continue;
    kept += line;
    kept += ' ';
  }
  kept = std::regex_replace(kept, pr_id, "");
  kept = std::regex_replace(kept, email, "");
  std::string out;
  for (char c : kept) {
    const bool space = c == ' ' || c == '\t' || c == '\r' || c == '\n';
    if (space) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += c;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

namespace {

struct LogEntry {
  std::string commit;
  std::vector<std::string> parents;
  std::int64_t time = 0;
  std::string message;
};

std::vector<LogEntry> read_log(const std::filesystem::path& repo) {
  const std::string out = git(repo, {"log", "--no-merges", "--format=%H%x00%P%x00%ct%x00%B%x1e", "HEAD"});
  std::vector<LogEntry> entries;
  std::size_t pos = 0;
  while (pos < out.size()) {
    auto end = out.find('\x1e', pos);
    if (end == std::string::npos) break;
    std::string_view rec(out.data() + pos, end - pos);
    pos = end + 1;
    while (!rec.empty() && (rec.front() == '\n')) rec.remove_prefix(1);
    std::vector<std::string_view> parts;
    for (int k = 0; k < 3; ++k) {
      auto z = rec.find('\0');
      if (z == std::string_view::npos) break;
      parts.push_back(rec.substr(0, z));
      rec.remove_prefix(z + 1);
    }
    if (parts.size() != 3) continue;
    LogEntry e;
    e.commit = std::string(parts[0]);
    std::string_view ps = parts[1];
    while (!ps.empty()) {
      auto sp = ps.find(' ');
      e.parents.emplace_back(ps.substr(0, sp));
      if (sp == std::string_view::npos) break;
      ps.remove_prefix(sp + 1);
    }
    e.time = std::stoll(std::string(parts[2]));
    e.message = std::string(rec);
    while (!e.message.empty() && e.message.back() == '\n') e.message.pop_back();
    entries.push_back(std::move(e));
  }
  return entries;
}

std::optional<TextFile> file_at(const std::filesystem::path& repo, const std::string& rev, const std::string& path) {
  ProcessResult r = run_process({"git", "-C", repo.string(), "show", rev + ":" + path});
  if (r.status != 0) return std::nullopt;
  return TextFile::parse(r.out);
}

// Files changed between the two revisions, as (status, path) pairs.
std::vector<std::pair<char, std::string>> changed_files(const std::filesystem::path& repo, const std::string& parent,
                                                        const std::string& commit) {
  const std::string out = git(repo, {"diff", "--no-renames", "--name-status", "-z", parent, commit});
  std::vector<std::pair<char, std::string>> files;
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (pos < out.size()) {
    auto z = out.find('\0', pos);
    if (z == std::string::npos) z = out.size();
    fields.emplace_back(out.substr(pos, z - pos));
    pos = z + 1;
  }
  for (std::size_t i = 0; i + 1 < fields.size(); i += 2) files.emplace_back(fields[i].empty() ? '?' : fields[i][0], fields[i + 1]);
  return files;
}

bool is_binary_diff(std::string_view diff) { return diff.find("\nBinary files ") != std::string_view::npos || diff.starts_with("Binary files "); }

// Fills hunks and snapshots; false when the commit cannot be represented
// (binary content, or files outside the language when purity is required).
bool fill_commit(const std::filesystem::path& repo, CommitRecord& rec, bool language_pure) {
  const auto files = changed_files(repo, rec.parent_id, rec.commit_id);
  std::vector<std::string> wanted;
  for (const auto& [status, path] : files) {
    if (is_source_file(path, rec.language)) {
      wanted.push_back(path);
    } else if (language_pure) {
      return false;
    }
  }
  if (wanted.empty()) return false;
  std::vector<std::string> args{"diff", "--no-color", "--no-ext-diff", "--no-renames", "-U3", rec.parent_id, rec.commit_id, "--"};
  args.insert(args.end(), wanted.begin(), wanted.end());
  const std::string diff = git(repo, args);
  if (is_binary_diff(diff)) return false;
  rec.hunks = parse_unified_diff(diff);
  for (const auto& path : wanted) {
    if (auto f = file_at(repo, rec.parent_id, path)) rec.files_before[path] = std::move(*f);
    if (auto f = file_at(repo, rec.commit_id, path)) rec.files_after[path] = std::move(*f);
  }
  return true;
}

std::string repo_id_of(const std::filesystem::path& repo) {
  auto p = std::filesystem::weakly_canonical(repo);
  auto name = p.filename().string();
  if (name.empty()) name = p.parent_path().filename().string();
  return name;
}

}  // namespace

CommitRecord load_commit(const std::filesystem::path& repo, const std::string& commit, Language lang) {
  CommitRecord rec;
  rec.repo_id = repo_id_of(repo);
  rec.language = lang;
  const std::string out = git(repo, {"log", "-1", "--format=%H%x00%P%x00%ct%x00%B", commit});
  auto parts = std::vector<std::string>{};
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    auto z = out.find('\0', pos);
    if (z == std::string::npos) throw Error(ErrorCode::RepoUnreadable, "cannot read commit " + commit);
    parts.push_back(out.substr(pos, z - pos));
    pos = z + 1;
  }
  rec.commit_id = parts[0];
  rec.parent_id = parts[1].substr(0, parts[1].find(' '));
  if (rec.parent_id.empty()) throw Error(ErrorCode::CheckoutFailed, "root commit " + commit + " has no parent");
  rec.time = std::stoll(parts[2]);
  rec.message_raw = out.substr(pos);
  while (!rec.message_raw.empty() && rec.message_raw.back() == '\n') rec.message_raw.pop_back();
  rec.message_clean = clean_message(rec.message_raw);
  fill_commit(repo, rec, false);
  return rec;
}

std::vector<CommitRecord> mine_commits(const std::filesystem::path& repo, Language lang, const MineFilters& filters,
                                       const MessageHook& hook) {
  if (!std::filesystem::exists(repo)) throw Error(ErrorCode::RepoUnreadable, repo.string() + " does not exist");
  const auto log = read_log(repo);
  const std::string repo_id = repo_id_of(repo);
  std::vector<std::optional<CommitRecord>> slots(log.size());

  auto work = [&](std::size_t i) {
    const auto& e = log[i];
    if (e.parents.empty()) return;
    CommitRecord rec;
    rec.repo_id = repo_id;
    rec.commit_id = e.commit;
    rec.parent_id = e.parents.front();
    rec.time = e.time;
    rec.language = lang;
    rec.message_raw = e.message;
    std::string cleaned = clean_message(e.message);
    if (hook) {
      auto refined = hook(cleaned);
      if (!refined) return;
      cleaned = *refined;
    }
    if (cleaned.size() < filters.min_message_chars || cleaned.size() > filters.max_message_chars) return;
    rec.message_clean = cleaned;
    if (!fill_commit(repo, rec, filters.language_pure)) return;
    const int n = static_cast<int>(rec.hunks.size());
    if (n < filters.min_hunks || n > filters.max_hunks) return;
    slots[i] = std::move(rec);
  };

  unsigned threads = filters.threads ? filters.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, log.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < log.size();) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  // git log lists newest first; canonical order is oldest first.
  std::vector<CommitRecord> out;
  for (auto it = slots.rbegin(); it != slots.rend(); ++it)
    if (*it) out.push_back(std::move(**it));
  std::stable_sort(out.begin(), out.end(), [](const CommitRecord& a, const CommitRecord& b) { return a.time < b.time; });
  return out;
}

void to_json(json& j, const Hunk& h) {
  j = json{{"file", h.file},           {"old_span", h.old_span},       {"new_span", h.new_span},
           {"old_lines", h.old_lines}, {"new_lines", h.new_lines},     {"context_before", h.context_before},
           {"context_after", h.context_after}};
}

void from_json(const json& j, Hunk& h) {
  h.file = normalize_path(j.at("file").get<std::string>());
  h.old_span = j.at("old_span").get<LineSpan>();
  h.new_span = j.at("new_span").get<LineSpan>();
  h.old_lines = j.at("old_lines").get<Lines>();
  h.new_lines = j.at("new_lines").get<Lines>();
  h.context_before = j.value("context_before", Lines{});
  h.context_after = j.value("context_after", Lines{});
  h.validate();
}

namespace {

json files_to_json(const std::map<std::string, TextFile>& files) {
  json j = json::object();
  for (const auto& [path, f] : files) j[path] = f.str();
  return j;
}

std::map<std::string, TextFile> files_from_json(const json& j) {
  std::map<std::string, TextFile> out;
  for (const auto& [path, text] : j.items()) out[path] = TextFile::parse(text.get<std::string>());
  return out;
}

}  // namespace

void to_json(json& j, const CommitRecord& r) {
  j = json{{"repo_id", r.repo_id},
           {"commit_id", r.commit_id},
           {"parent_id", r.parent_id},
           {"time", r.time},
           {"message_raw", r.message_raw},
           {"message_clean", r.message_clean ? json(*r.message_clean) : json(nullptr)},
           {"language", to_string(r.language)},
           {"hunks", r.hunks},
           {"files_before", files_to_json(r.files_before)},
           {"files_after", files_to_json(r.files_after)}};
}

void from_json(const json& j, CommitRecord& r) {
  r.repo_id = j.at("repo_id").get<std::string>();
  r.commit_id = j.at("commit_id").get<std::string>();
  r.parent_id = j.value("parent_id", std::string());
  r.time = j.value("time", std::int64_t{0});
  r.message_raw = j.value("message_raw", std::string());
  if (j.contains("message_clean") && !j["message_clean"].is_null()) r.message_clean = j["message_clean"].get<std::string>();
  r.language = language_from_string(j.at("language").get<std::string>());
  r.hunks = j.at("hunks").get<std::vector<Hunk>>();
  r.files_before = files_from_json(j.value("files_before", json::object()));
  r.files_after = files_from_json(j.value("files_after", json::object()));
}

}  // namespace nextedit
