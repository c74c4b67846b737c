#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nextedit/clone.hpp"
#include "nextedit/lsp/client.hpp"

namespace nextedit {

enum class ToolService { Rename, References, Definition, Clone, Diagnostics };
std::string_view to_string(ToolService s) noexcept;

/// 1-based line, 0-based byte column.
struct Position {
  int line = 1;
  int column = 0;
};

struct ToolEditCandidate {
  std::string file;
  LineSpan span;
  /// New text of the lines in `span`; empty for location-only services.
  std::optional<Lines> replacement;
  ToolService source = ToolService::References;
  double confidence = 1.0;  // tool results are never ranked against each other
  double score = 1.0;       // service-specific strength, e.g. clone similarity
  std::string message;
  // Exact character range (0-based bytes) on span.start, when known.
  int column_start = -1;
  int column_end = -1;
};

/// The deduction services the invoker can fire. Implementations see the
/// project as of the last sync().
class ToolServices {
 public:
  virtual ~ToolServices() = default;
  virtual std::string name() const = 0;
  virtual void sync(const Project& project) = 0;
  virtual std::vector<ToolEditCandidate> rename(const std::string& file, Position pos, const std::string& new_name) = 0;
  /// Includes the declaration.
  virtual std::vector<ToolEditCandidate> references(const std::string& file, Position pos) = 0;
  virtual std::vector<ToolEditCandidate> definition(const std::string& file, Position pos) = 0;
  virtual std::vector<ToolEditCandidate> diagnostics(const std::string& file, int wait_ms) = 0;

  std::vector<ToolEditCandidate> clones(const CloneQuery& query) const;
  const Project& project() const noexcept { return project_; }

 protected:
  Project project_;
};

/// Services answered by a real language server.
class LspToolServices : public ToolServices {
 public:
  explicit LspToolServices(std::unique_ptr<lsp::Client> client);
  static std::unique_ptr<LspToolServices> start(const lsp::ServerConfig& config);

  std::string name() const override;
  /// Mirrors the project to the server root on disk and into open documents.
  void sync(const Project& project) override;
  std::vector<ToolEditCandidate> rename(const std::string& file, Position pos, const std::string& new_name) override;
  std::vector<ToolEditCandidate> references(const std::string& file, Position pos) override;
  std::vector<ToolEditCandidate> definition(const std::string& file, Position pos) override;
  std::vector<ToolEditCandidate> diagnostics(const std::string& file, int wait_ms) override;

  /// Whether the last diagnostics() call timed out before a fresh publish.
  bool diagnostics_stale() const noexcept { return stale_; }
  lsp::Client& client() noexcept { return *client_; }

 private:
  json text_position(const std::string& file, Position pos) const;
  std::optional<ToolEditCandidate> location(const json& loc, ToolService source) const;

  std::unique_ptr<lsp::Client> client_;
  bool synced_once_ = false;
  bool stale_ = false;
};

/// Name-based stand-in for languages without an installed server: every
/// identifier token with the same text is an occurrence.
class LexicalToolServices : public ToolServices {
 public:
  std::string name() const override { return "lexical"; }
  void sync(const Project& project) override { project_ = project; }
  std::vector<ToolEditCandidate> rename(const std::string& file, Position pos, const std::string& new_name) override;
  std::vector<ToolEditCandidate> references(const std::string& file, Position pos) override;
  std::vector<ToolEditCandidate> definition(const std::string& file, Position pos) override;
  std::vector<ToolEditCandidate> diagnostics(const std::string&, int) override { return {}; }

 private:
  std::optional<SyntaxToken> identifier_at(const std::string& file, Position pos) const;
  std::vector<ToolEditCandidate> occurrences(const std::string& name, ToolService source) const;
};

/// A real server for the project's language when one is installed, else the
/// lexical stand-in.
std::unique_ptr<ToolServices> make_tool_services(Language lang, const std::filesystem::path& root,
                                                 const std::optional<lsp::ServerConfig>& config = std::nullopt);

void to_json(json& j, const ToolEditCandidate& c);

}  // namespace nextedit
