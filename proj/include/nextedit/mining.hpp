#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nextedit/diff.hpp"
#include "nextedit/serialize.hpp"

namespace nextedit {

/// Runs `git -C repo args...`; throws RepoUnreadable on a nonzero exit.
std::string git(const std::filesystem::path& repo, const std::vector<std::string>& args);

struct CommitRecord {
  std::string repo_id;
  std::string commit_id;
  std::string parent_id;
  std::int64_t time = 0;
  std::string message_raw;
  std::optional<std::string> message_clean;
  Language language = Language::Python;
  std::vector<Hunk> hunks;  // git diff order
  /// Touched files before and after the commit; absent means the file did
  /// not exist on that side.
  std::map<std::string, TextFile> files_before;
  std::map<std::string, TextFile> files_after;

  std::vector<Hunk> hunks_of(const std::string& file) const;
  std::string prompt() const { return message_clean.value_or(message_raw); }
};

struct MineFilters {
  int min_hunks = 2;
  int max_hunks = 50;
  std::size_t min_message_chars = 3;
  std::size_t max_message_chars = 2000;
  /// Reject commits that touch files outside the target language.
  bool language_pure = true;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Optional message refiner (e.g. an LLM). Returning nullopt rejects the
/// commit as vague or multi-intent.
using MessageHook = std::function<std::optional<std::string>(const std::string& cleaned)>;

/// Strips PR ids like "(#1234)", e-mail addresses and trailer lines
/// (Signed-off-by, Co-authored-by, ...), then collapses whitespace.
std::string clean_message(std::string_view raw);

/// Non-merge, non-root commits of HEAD's history passing the filters, in
/// (commit time, history order) order.
std::vector<CommitRecord> mine_commits(const std::filesystem::path& repo, Language lang,
                                       const MineFilters& filters = {}, const MessageHook& hook = {});

/// Builds a record from an explicit parent..commit pair without filtering.
CommitRecord load_commit(const std::filesystem::path& repo, const std::string& commit, Language lang);

/// Source files of `lang` as of revision `rev`, read straight from the object
/// store. Throws CheckoutFailed.
Project checkout_project(const std::filesystem::path& repo, const std::string& rev, Language lang);

void to_json(json& j, const Hunk& h);
void from_json(const json& j, Hunk& h);
void to_json(json& j, const CommitRecord& r);
void from_json(const json& j, CommitRecord& r);

}  // namespace nextedit
