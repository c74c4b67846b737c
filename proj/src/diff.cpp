#include "nextedit/diff.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "nextedit/lcs.hpp"

namespace nextedit {

Edit Hunk::to_edit() const {
  Edit e;
  e.file = file;
  e.line_start = old_span.start;
  e.line_end = old_span.end;
  e.code_before = old_lines;
  e.code_after = new_lines;
  return e;
}

bool Hunk::touches(std::string_view path, const LineSpan& span) const {
  if (path != file || span.empty()) return false;
  if (!old_lines.empty()) return old_span.intersects(span);
  return old_span.start >= span.start && old_span.start <= span.end + 1;
}

void Hunk::validate() const {
  if (old_lines.empty() && new_lines.empty()) throw Error(ErrorCode::MalformedDiff, "hunk without changed lines");
  if (old_span.length() != static_cast<int>(old_lines.size()) || new_span.length() != static_cast<int>(new_lines.size()))
    throw Error(ErrorCode::MalformedDiff, "hunk span disagrees with its line count");
}

namespace {

constexpr std::size_t kContextKept = 3;

struct Range {
  int start = 0;
  int count = 1;
};

bool parse_range(std::string_view s, Range& r) {
  auto comma = s.find(',');
  auto head = s.substr(0, comma);
  if (std::from_chars(head.data(), head.data() + head.size(), r.start).ec != std::errc()) return false;
  r.count = 1;
  if (comma != std::string_view::npos) {
    auto tail = s.substr(comma + 1);
    if (std::from_chars(tail.data(), tail.data() + tail.size(), r.count).ec != std::errc()) return false;
  }
  return true;
}

std::string strip_prefix(std::string_view path) {
  if (path.starts_with("a/") || path.starts_with("b/")) path.remove_prefix(2);
  // git quotes paths with unusual characters; tabs separate a timestamp
  auto tab = path.find('\t');
  if (tab != std::string_view::npos) path = path.substr(0, tab);
  return std::string(path);
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::MalformedDiff, "line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

std::vector<FileDiff> parse_unified_diff_files(std::string_view text) {
  std::vector<FileDiff> files;
  const Lines lines = split_lines(text);
  FileDiff* current = nullptr;
  bool have_minus = false;
  std::string pending_old;

  std::size_t i = 0;
  auto file_path = [&]() -> std::string {
    if (current->new_path != "/dev/null" && !current->new_path.empty()) return normalize_path(current->new_path);
    return normalize_path(current->old_path);
  };

  while (i < lines.size()) {
    std::string_view line = lines[i];
    if (line.starts_with("diff --git ")) {
      files.emplace_back();
      current = &files.back();
      auto rest = line.substr(11);
      auto sep = rest.find(" b/");
      if (sep != std::string_view::npos) {
        current->old_path = strip_prefix(rest.substr(0, sep));
        current->new_path = strip_prefix(rest.substr(sep + 1));
      }
      have_minus = false;
      ++i;
      continue;
    }
    if (line.starts_with("--- ")) {
      pending_old = line.substr(4) == "/dev/null" ? "/dev/null" : strip_prefix(line.substr(4));
      have_minus = true;
      ++i;
      continue;
    }
    if (line.starts_with("+++ ")) {
      if (!have_minus) malformed(i + 1, "'+++' without preceding '---'");
      const std::string new_path = line.substr(4) == "/dev/null" ? "/dev/null" : strip_prefix(line.substr(4));
      if (!current || !current->hunks.empty() ||
          (!current->new_path.empty() && current->new_path != new_path && new_path != "/dev/null")) {
        files.emplace_back();
        current = &files.back();
      }
      current->old_path = pending_old;
      current->new_path = new_path;
      have_minus = false;
      ++i;
      continue;
    }
    if (line.starts_with("@@")) {
      if (!current) malformed(i + 1, "hunk header before any file header");
      auto close = line.find("@@", 2);
      if (close == std::string_view::npos) malformed(i + 1, "unterminated hunk header");
      auto header = line.substr(2, close - 2);
      auto minus = header.find('-');
      auto plus = header.find('+');
      if (minus == std::string_view::npos || plus == std::string_view::npos || plus < minus)
        malformed(i + 1, "bad hunk header");
      auto old_txt = header.substr(minus + 1, header.find(' ', minus) - minus - 1);
      auto new_txt = header.substr(plus + 1, header.find(' ', plus) - plus - 1);
      Range old_r, new_r;
      if (!parse_range(old_txt, old_r) || !parse_range(new_txt, new_r)) malformed(i + 1, "bad hunk range");
      int old_left = old_r.count, new_left = new_r.count;
      int cur_old = old_r.count == 0 ? old_r.start + 1 : old_r.start;
      int cur_new = new_r.count == 0 ? new_r.start + 1 : new_r.start;
      const std::string path = file_path();

      Hunk run;
      bool in_run = false;
      Lines context;
      Hunk* last = nullptr;
      auto flush = [&] {
        if (!in_run) return;
        run.file = path;
        run.old_span.end = run.old_span.start + static_cast<int>(run.old_lines.size()) - 1;
        run.new_span.end = run.new_span.start + static_cast<int>(run.new_lines.size()) - 1;
        run.context_before.assign(context.end() - static_cast<long>(std::min(context.size(), kContextKept)), context.end());
        current->hunks.push_back(std::move(run));
        last = &current->hunks.back();
        run = Hunk{};
        in_run = false;
        context.clear();
      };
      ++i;
      while (i < lines.size() && (old_left > 0 || new_left > 0)) {
        std::string_view body = lines[i];
        const char tag = body.empty() ? ' ' : body[0];
        const std::string content(body.empty() ? body : body.substr(1));
        if (tag == '\\') {
          ++i;
          continue;
        }
        if (tag == ' ') {
          flush();
          if (old_left <= 0 || new_left <= 0) malformed(i + 1, "context line exceeds hunk range");
          if (last && last->context_after.size() < kContextKept) last->context_after.push_back(content);
          context.push_back(content);
          --old_left;
          --new_left;
          ++cur_old;
          ++cur_new;
        } else if (tag == '-' || tag == '+') {
          if (!in_run) {
            in_run = true;
            run.old_span.start = cur_old;
            run.new_span.start = cur_new;
            last = nullptr;
          }
          if (tag == '-') {
            if (old_left <= 0) malformed(i + 1, "removed line exceeds hunk range");
            run.old_lines.push_back(content);
            --old_left;
            ++cur_old;
          } else {
            if (new_left <= 0) malformed(i + 1, "added line exceeds hunk range");
            run.new_lines.push_back(content);
            --new_left;
            ++cur_new;
          }
        } else {
          malformed(i + 1, "unexpected line inside hunk");
        }
        ++i;
      }
      if (old_left > 0 || new_left > 0) malformed(i, "hunk truncated");
      flush();
      while (i < lines.size() && lines[i].starts_with("\\")) ++i;
      continue;
    }
    ++i;  // index, mode, similarity, Binary files ... lines
  }
  return files;
}

std::vector<Hunk> parse_unified_diff(std::string_view text) {
  std::vector<Hunk> out;
  for (auto& f : parse_unified_diff_files(text))
    for (auto& h : f.hunks) out.push_back(std::move(h));
  return out;
}

std::string render_unified_diff(std::span<const Hunk> hunks) {
  std::string out;
  const std::string* current = nullptr;
  for (const auto& h : hunks) {
    if (!current || *current != h.file) {
      out += "--- a/" + h.file + "\n+++ b/" + h.file + "\n";
      current = &h.file;
    }
    const int oc = static_cast<int>(h.old_lines.size());
    const int nc = static_cast<int>(h.new_lines.size());
    const int os = oc == 0 ? h.old_span.start - 1 : h.old_span.start;
    const int ns = nc == 0 ? h.new_span.start - 1 : h.new_span.start;
    out += "@@ -" + std::to_string(os) + "," + std::to_string(oc) + " +" + std::to_string(ns) + "," +
           std::to_string(nc) + " @@\n";
    for (const auto& l : h.old_lines) out += "-" + l + "\n";
    for (const auto& l : h.new_lines) out += "+" + l + "\n";
  }
  return out;
}

std::vector<Hunk> diff_lines(std::span<const std::string> before, std::span<const std::string> after,
                             std::string_view file) {
  auto matches = longest_common_subsequence(before, after);
  matches.emplace_back(static_cast<int>(before.size()), static_cast<int>(after.size()));
  std::vector<Hunk> hunks;
  int pa = -1, pb = -1;
  for (auto [qa, qb] : matches) {
    if (qa - pa > 1 || qb - pb > 1) {
      Hunk h;
      h.file = std::string(file);
      h.old_lines.assign(before.begin() + pa + 1, before.begin() + qa);
      h.new_lines.assign(after.begin() + pb + 1, after.begin() + qb);
      h.old_span = {pa + 2, qa};
      h.new_span = {pb + 2, qb};
      for (int c = std::max(0, pa - 2); c <= pa; ++c) h.context_before.push_back(before[c]);
      for (int c = qa; c < std::min<int>(qa + 3, static_cast<int>(before.size())); ++c) h.context_after.push_back(before[c]);
      hunks.push_back(std::move(h));
    }
    pa = qa;
    pb = qb;
  }
  return hunks;
}

Lines apply_hunks(std::span<const std::string> before, std::span<const Hunk> hunks) {
  Lines out(before.begin(), before.end());
  std::vector<const Hunk*> order;
  for (const auto& h : hunks) order.push_back(&h);
  std::sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->old_span.start > y->old_span.start; });
  for (const Hunk* h : order) {
    const auto first = out.begin() + (h->old_span.start - 1);
    for (std::size_t k = 0; k < h->old_lines.size(); ++k) {
      if (first[static_cast<long>(k)] != h->old_lines[k])
        throw Error(ErrorCode::ContentMismatch, h->file + ": hunk does not apply");
    }
    out.erase(first, first + static_cast<long>(h->old_lines.size()));
    out.insert(out.begin() + (h->old_span.start - 1), h->new_lines.begin(), h->new_lines.end());
  }
  return out;
}

}  // namespace nextedit
