#include "nextedit/server.hpp"

#include <unistd.h>

#include <atomic>
#include <iostream>

#include "nextedit/lsp/services.hpp"

namespace nextedit {

namespace {

// JSON-RPC error codes
constexpr int kParseError = -32700;
constexpr int kInvalidRequest = -32600;
constexpr int kMethodNotFound = -32601;
constexpr int kInvalidParams = -32602;
constexpr int kEngineError = -32000;

struct RpcError {
  int code;
  std::string message;
  json data = nullptr;
};

json error_reply(const json& id, const RpcError& e) {
  json err = {{"code", e.code}, {"message", e.message}};
  if (!e.data.is_null()) err["data"] = e.data;
  return {{"jsonrpc", "2.0"}, {"id", id}, {"error", err}};
}

std::filesystem::path make_shadow() {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("nextedit-serve-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

JsonScorer scorer_for(const std::vector<std::string>& command) {
  return command.empty() ? JsonScorer{} : command_scorer(command);
}

}  // namespace

SessionServer::SessionServer(ServerOptions options) : options_(std::move(options)) {}

SessionServer::~SessionServer() {
  tools_.reset();
  if (!shadow_.empty()) {
    std::error_code ec;
    std::filesystem::remove_all(shadow_, ec);
  }
}

void SessionServer::require_initialized() const {
  if (!initialized_) throw RpcError{kInvalidRequest, "initialize first"};
}

json SessionServer::initialize(const json& params) {
  if (!params.contains("root")) throw RpcError{kInvalidParams, "initialize needs root"};
  const std::filesystem::path root = params["root"].get<std::string>();
  const Language lang = language_from_string(params.value("language", std::string("python")));
  project_ = Project::load(root, lang);
  session_ = EditSession{};
  session_.project_root = root;
  if (params.contains("prompt")) session_.prompt = params["prompt"].get<std::string>();

  CompositionScorer composition;
  if (!options_.invoker_command.empty()) {
    composition = [s = command_scorer(options_.invoker_command)](const std::string& encoded) {
      return s(json{{"input", encoded}}).get<std::map<std::string, double>>();
    };
  }
  invoker_ = options_.invoker == "none"
                 ? nullptr
                 : make_invoker(options_.invoker, lang, options_.seed, std::move(composition), options_.step.invoker);
  locator_ = options_.locator == "none" ? nullptr : make_locator(options_.locator, scorer_for(options_.locator_command));
  generator_ =
      options_.generator == "none" ? nullptr : make_generator(options_.generator, scorer_for(options_.generator_command));
  tools_.reset();
  if (options_.lsp) {
    if (shadow_.empty()) shadow_ = make_shadow();
    std::optional<lsp::ServerConfig> config;
    auto configured = lsp::load_server_configs(options_.lsp_config, shadow_);
    if (auto it = configured.find(lang); it != configured.end()) config = it->second;
    tools_ = make_tool_services(lang, shadow_, config);
  } else {
    tools_ = std::make_unique<LexicalToolServices>();
  }
  tools_->sync(project_);
  last_.clear();
  suppressed_.clear();
  revision_ = 0;
  initialized_ = true;
  return {{"revision", revision_}, {"tools", tools_->name()}, {"files", project_.file_count()}};
}

void SessionServer::apply(Edit edit) {
  project_ = apply_edit(project_, edit);
  session_.append(std::move(edit));
  suppressed_.clear();
  last_.clear();
  ++revision_;
}

json SessionServer::run_step() {
  last_.clear();
  if (!session_.prior_edits.empty()) {
    Engine engine{invoker_.get(), tools_.get(), locator_.get(), generator_.get()};
    auto result = step(session_, project_, engine, options_.step);
    for (auto& r : result.recommendations)
      if (!suppressed_.contains({r.file, r.span.start, r.span.end})) last_.push_back(std::move(r));
  }
  return ranked_json(last_, last_.size());
}

json SessionServer::dispatch(const std::string& method, const json& params) {
  if (method == "initialize") return initialize(params);
  if (method == "shutdown") return nullptr;
  require_initialized();
  if (method == "append") {
    if (!params.contains("edit")) throw RpcError{kInvalidParams, "append needs edit"};
    apply(params["edit"].get<Edit>());
    return {{"revision", revision_}};
  }
  if (method == "step") {
    json recs = run_step();
    return {{"revision", revision_}, {"recommendations", std::move(recs)}};
  }
  if (method == "accept" || method == "reject") {
    if (params.contains("revision") && params["revision"].get<long>() != revision_)
      throw RpcError{kInvalidParams, "stale revision", {{"revision", revision_}}};
    const auto index = params.value("index", std::size_t{0});
    if (index >= last_.size()) throw RpcError{kInvalidParams, "no recommendation " + std::to_string(index)};
    const Recommendation rec = last_[index];
    if (method == "reject") {
      suppressed_.emplace(rec.file, rec.span.start, rec.span.end);
      last_.erase(last_.begin() + static_cast<long>(index));
      return {{"revision", revision_}, {"suppressed", suppressed_.size()}};
    }
    Edit e = recommendation_edit(rec, project_, params.value("candidate", std::size_t{0}));
    json applied = e;
    apply(std::move(e));
    json recs = run_step();
    return {{"revision", revision_}, {"applied", std::move(applied)}, {"recommendations", std::move(recs)}};
  }
  throw RpcError{kMethodNotFound, "unknown method " + method};
}

json SessionServer::handle(const json& message) {
  const json id = message.contains("id") ? message["id"] : json(nullptr);
  const bool notification = !message.contains("id");
  if (!message.is_object() || !message.contains("method") || !message["method"].is_string())
    return error_reply(id, {kInvalidRequest, "not a request"});
  const std::string method = message["method"].get<std::string>();
  if (method == "exit") {
    exiting_ = true;
    return nullptr;
  }
  try {
    json result = dispatch(method, message.value("params", json::object()));
    if (notification) return nullptr;
    return {{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
  } catch (const RpcError& e) {
    return notification ? json(nullptr) : error_reply(id, e);
  } catch (const Error& e) {
    return notification ? json(nullptr)
                        : error_reply(id, {kEngineError, e.what(), {{"kind", std::string(to_string(e.code()))}}});
  } catch (const json::exception& e) {
    return notification ? json(nullptr) : error_reply(id, {kInvalidParams, e.what()});
  }
}

void SessionServer::serve(std::istream& in, std::ostream& out) {
  std::string line;
  while (!exiting_ && std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json reply;
    try {
      reply = handle(json::parse(line));
    } catch (const json::parse_error& e) {
      reply = error_reply(nullptr, {kParseError, e.what()});
    }
    if (!reply.is_null()) out << reply.dump() << '\n' << std::flush;
  }
}

}  // namespace nextedit
