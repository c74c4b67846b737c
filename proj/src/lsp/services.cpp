#include "nextedit/lsp/services.hpp"

#include <algorithm>
#include <set>

namespace nextedit {

std::string_view to_string(ToolService s) noexcept {
  switch (s) {
    case ToolService::Rename: return "rename";
    case ToolService::References: return "references";
    case ToolService::Definition: return "definition";
    case ToolService::Clone: return "clone";
    case ToolService::Diagnostics: return "diagnostics";
  }
  return "references";
}

std::vector<ToolEditCandidate> ToolServices::clones(const CloneQuery& query) const {
  std::vector<ToolEditCandidate> out;
  for (const auto& hit : detect_clones(query, project_)) {
    ToolEditCandidate c;
    c.file = hit.file;
    c.span = hit.span;
    c.source = ToolService::Clone;
    c.score = hit.similarity;
    out.push_back(std::move(c));
  }
  return out;
}

LspToolServices::LspToolServices(std::unique_ptr<lsp::Client> client) : client_(std::move(client)) {
  project_ = Project(client_->config().language);
}

std::unique_ptr<LspToolServices> LspToolServices::start(const lsp::ServerConfig& config) {
  return std::make_unique<LspToolServices>(lsp::Client::start(config));
}

std::string LspToolServices::name() const { return "lsp:" + client_->config().command.front(); }

void LspToolServices::sync(const Project& project) {
  const auto& root = client_->config().root;
  for (const auto& path : project.paths()) {
    const auto& f = project.file(path);
    const bool changed = !synced_once_ || !project_.has_file(path) || !(project_.file(path) == f);
    if (changed) {
      std::filesystem::create_directories((root / path).parent_path());
      write_file(root / path, f.str());
    }
    client_->sync_document(path, f.str());
  }
  if (synced_once_) {
    for (const auto& path : project_.paths()) {
      if (project.has_file(path)) continue;
      std::error_code ec;
      std::filesystem::remove(root / path, ec);
      client_->sync_document(path, "");
    }
  }
  project_ = project;
  synced_once_ = true;
}

json LspToolServices::text_position(const std::string& file, Position pos) const {
  const auto& lines = project_.file(file).lines;
  const std::string_view text = pos.line >= 1 && pos.line <= static_cast<int>(lines.size()) ? std::string_view(lines[pos.line - 1]) : std::string_view{};
  return {{"textDocument", {{"uri", client_->uri_of(file)}}},
          {"position", {{"line", pos.line - 1}, {"character", lsp::utf16_column(text, pos.column)}}}};
}

namespace {

struct ByteRange {
  int start_line, start_col, end_line, end_col;  // 0-based lines, byte columns
};

ByteRange to_bytes(const json& range, const Lines& lines) {
  auto line_text = [&](int l) -> std::string_view {
    return l >= 0 && l < static_cast<int>(lines.size()) ? std::string_view(lines[l]) : std::string_view{};
  };
  ByteRange r;
  r.start_line = range["start"]["line"].get<int>();
  r.end_line = range["end"]["line"].get<int>();
  r.start_col = lsp::byte_column(line_text(r.start_line), range["start"]["character"].get<int>());
  r.end_col = lsp::byte_column(line_text(r.end_line), range["end"]["character"].get<int>());
  return r;
}

}  // namespace

std::vector<ToolEditCandidate> LspToolServices::rename(const std::string& file, Position pos,
                                                       const std::string& new_name) {
  json params = text_position(file, pos);
  params["newName"] = new_name;
  const json result = client_->request("textDocument/rename", params);
  if (result.is_null()) return {};
  // uri -> text edits
  std::vector<std::pair<std::string, json>> per_file;
  if (result.contains("documentChanges")) {
    for (const auto& ch : result["documentChanges"])
      if (ch.contains("edits")) per_file.emplace_back(ch["textDocument"]["uri"].get<std::string>(), ch["edits"]);
  } else if (result.contains("changes")) {
    for (const auto& [uri, edits] : result["changes"].items()) per_file.emplace_back(uri, edits);
  }
  std::vector<ToolEditCandidate> out;
  for (const auto& [uri, edits] : per_file) {
    const std::string rel = client_->rel_path_of(uri);
    if (!project_.has_file(rel)) continue;
    const auto& lines = project_.file(rel).lines;
    std::vector<std::pair<ByteRange, std::string>> ranges;
    for (const auto& te : edits) ranges.emplace_back(to_bytes(te["range"], lines), te.value("newText", std::string()));
    // All edits of a line applied together give that line's new text.
    std::map<int, std::string> new_lines;
    std::vector<std::size_t> order(ranges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      const auto& x = ranges[a].first;
      const auto& y = ranges[b].first;
      return std::tie(x.start_line, x.start_col) > std::tie(y.start_line, y.start_col);
    });
    for (auto i : order) {
      const auto& [r, text] = ranges[i];
      if (r.start_line != r.end_line || r.start_line >= static_cast<int>(lines.size())) continue;
      auto [it, fresh] = new_lines.try_emplace(r.start_line, lines[r.start_line]);
      it->second.replace(static_cast<std::size_t>(r.start_col), static_cast<std::size_t>(r.end_col - r.start_col), text);
    }
    for (const auto& [r, text] : ranges) {
      ToolEditCandidate c;
      c.file = rel;
      c.source = ToolService::Rename;
      c.span = {r.start_line + 1, r.end_line + 1};
      c.column_start = r.start_col;
      c.column_end = r.end_col;
      if (r.start_line == r.end_line && new_lines.contains(r.start_line)) {
        c.replacement = Lines{new_lines[r.start_line]};
      } else {
        // Multi-line edit: splice directly.
        std::string head = r.start_line < static_cast<int>(lines.size()) ? lines[r.start_line].substr(0, r.start_col) : "";
        std::string tail = r.end_line < static_cast<int>(lines.size()) ? lines[r.end_line].substr(r.end_col) : "";
        c.replacement = split_lines(head + text + tail);
      }
      c.message = text;
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::optional<ToolEditCandidate> LspToolServices::location(const json& loc, ToolService source) const {
  const bool link = loc.contains("targetUri");
  const std::string uri = link ? loc["targetUri"].get<std::string>() : loc.value("uri", std::string());
  const json& range = link ? loc["targetSelectionRange"] : loc["range"];
  std::string rel;
  try {
    rel = client_->rel_path_of(uri);
  } catch (const Error&) {
    return std::nullopt;  // outside the workspace (library stubs)
  }
  if (!project_.has_file(rel)) return std::nullopt;
  const auto r = to_bytes(range, project_.file(rel).lines);
  ToolEditCandidate c;
  c.file = rel;
  c.span = {r.start_line + 1, r.end_line + 1};
  c.column_start = r.start_col;
  c.column_end = r.end_col;
  c.source = source;
  if (c.span.end > project_.file(rel).line_count()) return std::nullopt;
  return c;
}

std::vector<ToolEditCandidate> LspToolServices::references(const std::string& file, Position pos) {
  json params = text_position(file, pos);
  params["context"] = {{"includeDeclaration", true}};
  const json result = client_->request("textDocument/references", params);
  std::vector<ToolEditCandidate> out;
  if (!result.is_array()) return out;
  for (const auto& loc : result)
    if (auto c = location(loc, ToolService::References)) out.push_back(std::move(*c));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.file, a.span.start, a.column_start) < std::tie(b.file, b.span.start, b.column_start);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& a, const auto& b) {
                          return a.file == b.file && a.span == b.span && a.column_start == b.column_start;
                        }),
            out.end());
  return out;
}

std::vector<ToolEditCandidate> LspToolServices::definition(const std::string& file, Position pos) {
  const json result = client_->request("textDocument/definition", text_position(file, pos));
  std::vector<ToolEditCandidate> out;
  if (result.is_null()) return out;
  const json list = result.is_array() ? result : json::array({result});
  for (const auto& loc : list)
    if (auto c = location(loc, ToolService::Definition)) out.push_back(std::move(*c));
  return out;
}

std::vector<ToolEditCandidate> LspToolServices::diagnostics(const std::string& file, int wait_ms) {
  auto diags = client_->diagnostics(file, wait_ms);
  stale_ = !diags.has_value();
  std::vector<ToolEditCandidate> out;
  if (!diags) return out;
  const int n = project_.has_file(file) ? project_.file(file).line_count() : 0;
  for (const auto& d : *diags) {
    ToolEditCandidate c;
    c.file = file;
    c.span = {std::min(d.line, std::max(n, 1)), std::min(std::max(d.end_line, d.line), std::max(n, 1))};
    c.source = ToolService::Diagnostics;
    c.message = d.message;
    out.push_back(std::move(c));
  }
  return out;
}

std::optional<SyntaxToken> LexicalToolServices::identifier_at(const std::string& file, Position pos) const {
  if (!project_.has_file(file)) throw Error(ErrorCode::FileMissing, file);
  const auto& lines = project_.file(file).lines;
  if (pos.line < 1 || pos.line > static_cast<int>(lines.size())) return std::nullopt;
  for (const auto& t : tokenize(std::span(&lines[pos.line - 1], 1), project_.language())) {
    if (pos.column >= t.column && pos.column <= t.end_column() && t.kind == TokenKind::Identifier) {
      auto out = t;
      out.line = pos.line;
      return out;
    }
  }
  return std::nullopt;
}

std::vector<ToolEditCandidate> LexicalToolServices::occurrences(const std::string& name, ToolService source) const {
  std::vector<ToolEditCandidate> out;
  for (const auto& path : project_.paths()) {
    for (const auto& t : tokenize(project_.file(path).lines, project_.language())) {
      if (t.kind != TokenKind::Identifier || t.text != name) continue;
      ToolEditCandidate c;
      c.file = path;
      c.span = {t.line, t.line};
      c.column_start = t.column;
      c.column_end = t.end_column();
      c.source = source;
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<ToolEditCandidate> LexicalToolServices::rename(const std::string& file, Position pos,
                                                           const std::string& new_name) {
  auto tok = identifier_at(file, pos);
  if (!tok) return {};
  auto out = occurrences(tok->text, ToolService::Rename);
  // Per line, the text with every occurrence on it renamed.
  std::map<std::pair<std::string, int>, std::string> renamed;
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    auto key = std::make_pair(it->file, it->span.start);
    auto [slot, fresh] = renamed.try_emplace(key, project_.file(it->file).lines[it->span.start - 1]);
    slot->second.replace(static_cast<std::size_t>(it->column_start),
                         static_cast<std::size_t>(it->column_end - it->column_start), new_name);
  }
  for (auto& c : out) {
    c.replacement = Lines{renamed[{c.file, c.span.start}]};
    c.message = new_name;
  }
  return out;
}

std::vector<ToolEditCandidate> LexicalToolServices::references(const std::string& file, Position pos) {
  auto tok = identifier_at(file, pos);
  if (!tok) return {};
  return occurrences(tok->text, ToolService::References);
}

std::vector<ToolEditCandidate> LexicalToolServices::definition(const std::string& file, Position pos) {
  auto tok = identifier_at(file, pos);
  if (!tok) return {};
  static const std::set<std::string> introducers{"def", "func", "function", "class", "type", "var", "let", "const", "interface"};
  for (const auto& path : project_.paths()) {
    const auto tokens = tokenize(project_.file(path).lines, project_.language());
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      if (tokens[i].kind != TokenKind::Identifier || tokens[i].text != tok->text) continue;
      if (!introducers.contains(tokens[i - 1].text)) continue;
      ToolEditCandidate c;
      c.file = path;
      c.span = {tokens[i].line, tokens[i].line};
      c.column_start = tokens[i].column;
      c.column_end = tokens[i].end_column();
      c.source = ToolService::Definition;
      return {c};
    }
  }
  return {};
}

std::unique_ptr<ToolServices> make_tool_services(Language lang, const std::filesystem::path& root,
                                                 const std::optional<lsp::ServerConfig>& config) {
  auto cfg = config ? config : lsp::default_server_config(lang, root);
  if (cfg) {
    cfg->root = root;
    try {
      return LspToolServices::start(*cfg);
    } catch (const Error&) {
      // fall through to the lexical stand-in
    }
  }
  return std::make_unique<LexicalToolServices>();
}

void to_json(json& j, const ToolEditCandidate& c) {
  j = json{{"file", c.file},
           {"span", c.span},
           {"source", std::string(to_string(c.source))},
           {"confidence", c.confidence},
           {"score", c.score}};
  if (c.replacement) j["replacement"] = *c.replacement;
  if (!c.message.empty()) j["message"] = c.message;
}

}  // namespace nextedit
