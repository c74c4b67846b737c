#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "nextedit/pipeline.hpp"

namespace nextedit {

struct ServerOptions {
  std::string invoker = "heuristic";        // "none" skips deduction
  std::string locator = "clone_baseline";  // "none" disables induction
  std::string generator = "template";      // "none" leaves locations only
  std::vector<std::string> invoker_command;
  std::vector<std::string> locator_command;
  std::vector<std::string> generator_command;
  bool lsp = true;
  json lsp_config = json::object();  // per-language server overrides
  StepConfig step;
  std::uint64_t seed = 0;
};

/// Engine side of the editor protocol: newline-delimited JSON-RPC 2.0.
///
///   initialize {root, language}        -> {revision, tools}
///   append {edit}                      -> {revision}
///   step {}                            -> {revision, recommendations}
///   accept {index, candidate?, revision?} -> {revision, applied, recommendations}
///   reject {index}                     -> {revision, suppressed}
///   shutdown {} / exit
///
/// Recommendations have the same shape as simulation trace records. The
/// engine owns the project text; a rejected (file, span) stays hidden until
/// the next edit.
class SessionServer {
 public:
  explicit SessionServer(ServerOptions options = {});
  ~SessionServer();

  /// Response for a request, null for a notification.
  json handle(const json& message);
  /// Reads one message per line until EOF or `exit`.
  void serve(std::istream& in, std::ostream& out);

  const Project& project() const noexcept { return project_; }
  const EditSession& session() const noexcept { return session_; }
  long revision() const noexcept { return revision_; }

 private:
  json dispatch(const std::string& method, const json& params);
  json initialize(const json& params);
  json run_step();
  void apply(Edit edit);
  void require_initialized() const;

  ServerOptions options_;
  bool initialized_ = false;
  bool exiting_ = false;
  Project project_;
  EditSession session_;
  long revision_ = 0;
  std::filesystem::path shadow_;  // language servers see a copy, never the user's tree
  std::unique_ptr<InvokerBackend> invoker_;
  std::unique_ptr<ToolServices> tools_;
  std::unique_ptr<LocatorBackend> locator_;
  std::unique_ptr<GeneratorBackend> generator_;
  std::vector<Recommendation> last_;
  std::set<std::tuple<std::string, int, int>> suppressed_;
};

}  // namespace nextedit
