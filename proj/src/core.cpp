#include "nextedit/core.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace nextedit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ContentMismatch: return "ContentMismatch";
    case ErrorCode::FileMissing: return "FileMissing";
    case ErrorCode::EmptySpan: return "EmptySpan";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedDiff: return "MalformedDiff";
    case ErrorCode::MalformedEncoding: return "MalformedEncoding";
    case ErrorCode::InconsistentMapping: return "InconsistentMapping";
    case ErrorCode::RepoUnreadable: return "RepoUnreadable";
    case ErrorCode::CheckoutFailed: return "CheckoutFailed";
    case ErrorCode::ReplayDesync: return "ReplayDesync";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::LaunchFailed: return "LaunchFailed";
    case ErrorCode::HandshakeTimeout: return "HandshakeTimeout";
    case ErrorCode::TransportClosed: return "TransportClosed";
    case ErrorCode::ServerError: return "ServerError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

constexpr std::array<std::string_view, 1> kPythonExt{".py"};
constexpr std::array<std::string_view, 1> kGoExt{".go"};
constexpr std::array<std::string_view, 1> kJavaExt{".java"};
constexpr std::array<std::string_view, 4> kJsExt{".js", ".jsx", ".mjs", ".cjs"};
constexpr std::array<std::string_view, 2> kTsExt{".ts", ".tsx"};

}  // namespace

std::string_view to_string(Language lang) noexcept {
  switch (lang) {
    case Language::Python: return "python";
    case Language::Go: return "go";
    case Language::Java: return "java";
    case Language::JavaScript: return "javascript";
    case Language::TypeScript: return "typescript";
  }
  return "python";
}

Language language_from_string(std::string_view name) {
  if (name == "python" || name == "py") return Language::Python;
  if (name == "go" || name == "golang") return Language::Go;
  if (name == "java") return Language::Java;
  if (name == "javascript" || name == "js") return Language::JavaScript;
  if (name == "typescript" || name == "ts") return Language::TypeScript;
  throw Error(ErrorCode::InvalidArgument, "unknown language '" + std::string(name) + "'");
}

std::span<const std::string_view> source_extensions(Language lang) noexcept {
  switch (lang) {
    case Language::Python: return kPythonExt;
    case Language::Go: return kGoExt;
    case Language::Java: return kJavaExt;
    case Language::JavaScript: return kJsExt;
    case Language::TypeScript: return kTsExt;
  }
  return kPythonExt;
}

bool is_source_file(std::string_view path, Language lang) noexcept {
  for (auto ext : source_extensions(lang)) {
    if (path.size() > ext.size() && path.ends_with(ext)) return true;
  }
  return false;
}

double line_overlap_ratio(const LineSpan& predicted, const LineSpan& gold) {
  if (predicted.empty() || gold.empty()) throw Error(ErrorCode::EmptySpan, "overlap of an empty span");
  const int lo = std::max(predicted.start, gold.start);
  const int hi = std::min(predicted.end, gold.end);
  if (hi < lo) return 0.0;
  return static_cast<double>(hi - lo + 1) / static_cast<double>(gold.length());
}

Lines split_lines(std::string_view text) {
  Lines out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      out.emplace_back(text.substr(pos));
      break;
    }
    out.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

std::string join_lines(std::span<const std::string> lines, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += sep;
    out += lines[i];
  }
  return out;
}

TextFile TextFile::parse(std::string_view text) {
  TextFile f;
  f.lines = split_lines(text);
  f.trailing_newline = text.empty() || text.back() == '\n';
  return f;
}

std::string TextFile::str() const {
  if (lines.empty()) return {};
  std::string out = join_lines(lines);
  if (trailing_newline) out += '\n';
  return out;
}

std::string normalize_path(std::string_view path) {
  std::string p(path);
  std::replace(p.begin(), p.end(), '\\', '/');
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= p.size()) {
    auto slash = p.find('/', pos);
    if (slash == std::string::npos) slash = p.size();
    std::string seg = p.substr(pos, slash - pos);
    pos = slash + 1;
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (parts.empty()) throw Error(ErrorCode::InvalidPath, "path escapes project root: " + std::string(path));
      parts.pop_back();
      continue;
    }
    parts.push_back(std::move(seg));
  }
  if (parts.empty()) throw Error(ErrorCode::InvalidPath, "empty path");
  return join_lines(parts, "/");
}

LineSpan Edit::location() const noexcept {
  if (!code_before.empty()) return old_span();
  const int anchor = std::max(1, line_start - 1);
  return {anchor, anchor};
}

Edit Edit::inverse() const {
  Edit inv = *this;
  std::swap(inv.code_before, inv.code_after);
  inv.line_end = line_start + static_cast<int>(inv.code_before.size()) - 1;
  return inv;
}

void Edit::validate() const {
  if (file.empty() || normalize_path(file) != file) throw Error(ErrorCode::InvalidPath, "edit path not normalized: " + file);
  if (line_start < 1) throw Error(ErrorCode::InvalidArgument, "line_start must be >= 1");
  if (code_before.empty()) {
    if (line_end != line_start - 1)
      throw Error(ErrorCode::InvalidArgument, "pure insertion must have line_end == line_start - 1");
  } else if (line_end - line_start + 1 != static_cast<int>(code_before.size())) {
    throw Error(ErrorCode::InvalidArgument, "span length disagrees with code_before");
  }
}

bool Project::has_file(std::string_view path) const { return files_.find(path) != files_.end(); }

const TextFile& Project::file(std::string_view path) const {
  auto it = files_.find(path);
  if (it == files_.end()) throw Error(ErrorCode::FileMissing, std::string(path));
  return *it->second;
}

void Project::set_file(std::string path, TextFile content) {
  files_[normalize_path(path)] = std::make_shared<const TextFile>(std::move(content));
}

void Project::remove_file(std::string_view path) {
  auto it = files_.find(path);
  if (it != files_.end()) files_.erase(it);
}

std::vector<std::string> Project::paths() const {
  std::vector<std::string> out;
  out.reserve(files_.size());
  for (const auto& [p, _] : files_) out.push_back(p);
  return out;
}

Project Project::load(const std::filesystem::path& root, Language lang) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error(ErrorCode::FileMissing, "not a directory: " + root.string());
  Project project(lang);
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
    const auto name = it->path().filename().string();
    if (it->is_directory() && (name.starts_with(".") || name == "node_modules")) {
      it.disable_recursion_pending();
      continue;
    }
    if (!it->is_regular_file()) continue;
    const auto rel = fs::relative(it->path(), root).generic_string();
    if (!is_source_file(rel, lang)) continue;
    std::ifstream in(it->path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    project.set_file(rel, ss.str());
  }
  return project;
}

void Project::write(const std::filesystem::path& root) const {
  namespace fs = std::filesystem;
  for (const auto& [path, body] : files_) {
    const auto target = root / path;
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + target.string());
    out << body->str();
  }
}

bool operator==(const Project& a, const Project& b) {
  if (a.files_.size() != b.files_.size()) return false;
  auto ib = b.files_.begin();
  for (const auto& [path, body] : a.files_) {
    if (path != ib->first) return false;
    if (body != ib->second && *body != *ib->second) return false;
    ++ib;
  }
  return true;
}

Project apply_edit(const Project& project, const Edit& edit) {
  edit.validate();
  const TextFile& current = project.file(edit.file);
  const int n = current.line_count();
  if (edit.code_before.empty()) {
    if (edit.line_start > n + 1)
      throw Error(ErrorCode::ContentMismatch, edit.file + ": insertion point beyond end of file");
  } else {
    if (edit.line_end > n)
      throw Error(ErrorCode::ContentMismatch, edit.file + ": edit range beyond end of file");
    for (int i = 0; i < static_cast<int>(edit.code_before.size()); ++i) {
      if (current.lines[edit.line_start - 1 + i] != edit.code_before[i])
        throw Error(ErrorCode::ContentMismatch,
                    edit.file + ":" + std::to_string(edit.line_start + i) + ": pre-edit code differs");
    }
  }
  TextFile next;
  next.trailing_newline = current.trailing_newline;
  next.lines.reserve(current.lines.size() + edit.code_after.size());
  const auto first = current.lines.begin() + (edit.line_start - 1);
  next.lines.insert(next.lines.end(), current.lines.begin(), first);
  next.lines.insert(next.lines.end(), edit.code_after.begin(), edit.code_after.end());
  next.lines.insert(next.lines.end(), first + static_cast<long>(edit.code_before.size()), current.lines.end());
  Project out = project;
  out.set_file(edit.file, std::move(next));
  return out;
}

std::optional<LineSpan> rebase_span(const LineSpan& span, const std::string& file, const Edit& applied) {
  if (file != applied.file) return span;
  const int delta = applied.line_delta();
  const int ls = applied.line_start;
  const int le = applied.line_end;
  const LineSpan shifted{span.start + delta, span.end + delta};
  if (applied.code_before.empty()) {
    if (span.empty()) return span.start < ls ? span : shifted;
    if (span.end < ls) return span;
    if (span.start >= ls) return shifted;
    return std::nullopt;
  }
  if (span.empty()) {
    if (span.start <= ls) return span;
    if (span.start > le) return shifted;
    return std::nullopt;
  }
  if (span.end < ls) return span;
  if (span.start > le) return shifted;
  return std::nullopt;
}

std::optional<Edit> rebase_edit(const Edit& pending, const Edit& applied) {
  auto span = rebase_span(pending.old_span(), pending.file, applied);
  if (!span) return std::nullopt;
  Edit out = pending;
  out.line_start = span->start;
  out.line_end = span->end;
  return out;
}

void EditSession::append(Edit edit) {
  edit.timestamp = prior_edits.empty() ? 1 : prior_edits.back().timestamp + 1;
  prior_edits.push_back(std::move(edit));
}

const Edit& EditSession::latest() const {
  if (prior_edits.empty()) throw Error(ErrorCode::InvalidArgument, "session has no prior edits");
  return prior_edits.back();
}

std::map<std::string, std::vector<int>> modified_lines(std::span<const Edit> edits) {
  std::map<std::string, std::vector<int>> marks;
  for (const auto& e : edits) {
    auto& lines = marks[e.file];
    std::vector<int> next;
    for (int m : lines) {
      if (auto moved = rebase_span({m, m}, e.file, e)) next.push_back(moved->start);
    }
    for (int i = 0; i < static_cast<int>(e.code_after.size()); ++i) next.push_back(e.line_start + i);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    lines = std::move(next);
  }
  return marks;
}

std::vector<std::optional<LineSpan>> current_spans(std::span<const Edit> edits) {
  std::vector<std::optional<LineSpan>> out;
  out.reserve(edits.size());
  for (std::size_t i = 0; i < edits.size(); ++i) {
    std::optional<LineSpan> span = edits[i].new_span();
    for (std::size_t j = i + 1; j < edits.size() && span; ++j) span = rebase_span(*span, edits[i].file, edits[j]);
    out.push_back(span);
  }
  return out;
}

}  // namespace nextedit
