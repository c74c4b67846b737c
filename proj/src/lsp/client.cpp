#include "nextedit/lsp/client.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "nextedit/process.hpp"

namespace nextedit::lsp {

void ServerConfig::validate() const {
  if (command.empty() || command.front().empty()) throw Error(ErrorCode::InvalidArgument, "server command is empty");
  if (timeout_ms <= 0) throw Error(ErrorCode::InvalidArgument, "server timeout must be positive");
}

namespace {

// typescript-language-server needs a tsserver.js (TypeScript 5.x or older).
std::filesystem::path find_tsserver() {
  std::vector<std::filesystem::path> candidates;
  if (const char* env = std::getenv("NEXTEDIT_TSSERVER")) candidates.emplace_back(env);
  std::error_code ec;
  if (auto tsc = find_executable("tsc"); !tsc.empty()) {
    auto real = std::filesystem::canonical(tsc, ec);
    if (!ec) candidates.push_back(real.parent_path().parent_path() / "lib" / "tsserver.js");
  }
  candidates.emplace_back("/usr/local/lib/ts5/node_modules/typescript/lib/tsserver.js");
  for (const auto& c : candidates)
    if (std::filesystem::exists(c, ec)) return c;
  return {};
}

}  // namespace

std::optional<ServerConfig> default_server_config(Language lang, const std::filesystem::path& root) {
  std::vector<std::vector<std::string>> choices;
  switch (lang) {
    case Language::Python:
      choices = {{"pyright-langserver", "--stdio"}, {"pylsp"}};
      break;
    case Language::JavaScript:
    case Language::TypeScript:
      choices = {{"typescript-language-server", "--stdio"}};
      break;
    case Language::Go:
      choices = {{"gopls"}};
      break;
    case Language::Java:
      choices = {{"jdtls"}};
      break;
  }
  for (auto& cmd : choices) {
    if (find_executable(cmd.front()).empty()) continue;
    ServerConfig c;
    c.language = lang;
    c.command = cmd;
    c.root = root;
    if (cmd.front() == "typescript-language-server") {
      auto tsserver = find_tsserver();
      if (tsserver.empty()) continue;
      c.initialization_options = {{"tsserver", {{"path", tsserver.string()}}}};
    }
    return c;
  }
  return std::nullopt;
}

std::map<Language, ServerConfig> load_server_configs(const json& config, const std::filesystem::path& root) {
  std::map<Language, ServerConfig> out;
  for (const auto& [name, entry] : config.items()) {
    ServerConfig c;
    c.language = language_from_string(name);
    c.command = entry.at("command").get<std::vector<std::string>>();
    c.initialization_options = entry.value("initialization_options", json::object());
    c.settings = entry.value("settings", json::object());
    c.timeout_ms = entry.value("timeout_ms", 5000);
    c.handshake_timeout_ms = entry.value("handshake_timeout_ms", 30000);
    c.root = root;
    c.validate();
    out[c.language] = std::move(c);
  }
  return out;
}

Client::Client(ServerConfig config) : config_(std::move(config)) {}

std::unique_ptr<Client> Client::start(const ServerConfig& config) {
  config.validate();
  std::unique_ptr<Client> c(new Client(config));
  c->config_.root = std::filesystem::absolute(config.root).lexically_normal();
  c->launch();
  try {
    c->handshake();
  } catch (const Error& e) {
    c->kill();
    if (e.code() == ErrorCode::Timeout) throw Error(ErrorCode::HandshakeTimeout, e.what());
    if (e.code() == ErrorCode::TransportClosed) throw Error(ErrorCode::LaunchFailed, e.what());
    throw;
  }
  return c;
}

void Client::launch() {
  if (find_executable(config_.command.front()).empty())
    throw Error(ErrorCode::LaunchFailed, config_.command.front() + " not found");
  // Sockets instead of pipes so writes can use MSG_NOSIGNAL.
  int in_pair[2], out_pair[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0 ||
      ::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, out_pair) != 0)
    throw Error(ErrorCode::LaunchFailed, std::strerror(errno));
  int status_pipe[2];
  if (::pipe2(status_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::LaunchFailed, std::strerror(errno));
  std::vector<char*> argv;
  for (auto& a : config_.command) argv.push_back(a.data());
  argv.push_back(nullptr);
  const std::string dir = config_.root.string();

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::LaunchFailed, std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pair[1], 0);
    ::dup2(out_pair[1], 1);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, 2);
    if (!dir.empty() && ::chdir(dir.c_str()) != 0) {
      int e = errno;
      (void)!::write(status_pipe[1], &e, sizeof e);
      ::_exit(127);
    }
    ::execvp(argv[0], argv.data());
    int e = errno;
    (void)!::write(status_pipe[1], &e, sizeof e);
    ::_exit(127);
  }
  ::close(in_pair[1]);
  ::close(out_pair[1]);
  ::close(status_pipe[1]);
  int child_errno = 0;
  const bool failed = ::read(status_pipe[0], &child_errno, sizeof child_errno) == sizeof child_errno;
  ::close(status_pipe[0]);
  if (failed) {
    ::waitpid(pid, nullptr, 0);
    ::close(in_pair[0]);
    ::close(out_pair[0]);
    throw Error(ErrorCode::LaunchFailed, "cannot start " + config_.command.front() + ": " + std::strerror(child_errno));
  }
  pid_ = pid;
  to_server_ = in_pair[0];
  from_server_ = out_pair[0];
  reader_ = std::thread([this] { reader_loop(); });
}

void Client::handshake() {
  const std::string root_uri = path_to_uri(config_.root.string());
  json caps = {
      {"general", {{"positionEncodings", {"utf-16"}}}},
      {"workspace",
       {{"workspaceFolders", true},
        {"configuration", true},
        {"applyEdit", false},
        {"workspaceEdit", {{"documentChanges", true}}},
        {"didChangeWatchedFiles", {{"dynamicRegistration", false}}}}},
      {"textDocument",
       {{"synchronization", {{"didSave", false}, {"dynamicRegistration", false}}},
        {"rename", {{"prepareSupport", false}}},
        {"references", json::object()},
        {"definition", {{"linkSupport", false}}},
        {"publishDiagnostics", {{"relatedInformation", false}, {"versionSupport", true}}}}},
      {"window", {{"workDoneProgress", true}}}};
  json params = {{"processId", static_cast<int>(::getpid())},
                 {"rootUri", root_uri},
                 {"rootPath", config_.root.string()},
                 {"capabilities", caps},
                 {"workspaceFolders", {{{"uri", root_uri}, {"name", config_.root.filename().string()}}}},
                 {"initializationOptions", config_.initialization_options}};
  const json result = request("initialize", params, config_.handshake_timeout_ms);
  capabilities_ = result.value("capabilities", json::object());
  notify("initialized", json::object());
  if (!config_.settings.empty()) notify("workspace/didChangeConfiguration", {{"settings", config_.settings}});
}

Client::~Client() {
  try {
    shutdown();
  } catch (...) {
  }
}

void Client::shutdown() {
  if (shutting_down_.exchange(true)) return;
  if (!closed_) {
    try {
      request("shutdown", nullptr, 2000);
      notify("exit", nullptr);
    } catch (const Error&) {
    }
  }
  // Give the server a moment to exit on its own.
  if (pid_ > 0) {
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  kill();
}

void Client::kill() {
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
  if (to_server_ >= 0) ::shutdown(to_server_, SHUT_RDWR);
  if (from_server_ >= 0) ::shutdown(from_server_, SHUT_RDWR);
  if (reader_.joinable() && reader_.get_id() != std::this_thread::get_id()) reader_.join();
  if (to_server_ >= 0) ::close(to_server_);
  if (from_server_ >= 0) ::close(from_server_);
  to_server_ = from_server_ = -1;
  closed_ = true;
}

void Client::send(const json& message) {
  const std::string bytes = frame_message(message);
  std::lock_guard lock(write_mutex_);
  if (closed_ || to_server_ < 0) throw Error(ErrorCode::TransportClosed, "server connection is closed");
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t n = ::send(to_server_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::TransportClosed, std::string("write to server failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::future<json> Client::request_async(const std::string& method, const json& params) {
  long id = 0;
  return issue(method, params, id);
}

std::future<json> Client::issue(const std::string& method, const json& params, long& id_out) {
  const long id = id_out = next_id_++;
  std::future<json> fut;
  {
    std::lock_guard lock(pending_mutex_);
    fut = pending_[id].get_future();
  }
  json msg = {{"jsonrpc", "2.0"}, {"id", id}, {"method", method}};
  if (!params.is_null()) msg["params"] = params;
  try {
    send(msg);
  } catch (...) {
    std::lock_guard lock(pending_mutex_);
    pending_.erase(id);
    throw;
  }
  return fut;
}

json Client::request(const std::string& method, const json& params, std::optional<int> timeout_ms) {
  long id = 0;
  auto fut = issue(method, params, id);
  const int wait = timeout_ms.value_or(config_.timeout_ms);
  if (fut.wait_for(std::chrono::milliseconds(wait)) != std::future_status::ready) {
    {
      std::lock_guard lock(pending_mutex_);
      pending_.erase(id);
    }
    try {
      notify("$/cancelRequest", {{"id", id}});
    } catch (const Error&) {
    }
    throw Error(ErrorCode::Timeout, method + " timed out after " + std::to_string(wait) + " ms");
  }
  return fut.get();
}

void Client::notify(const std::string& method, const json& params) {
  json msg = {{"jsonrpc", "2.0"}, {"method", method}};
  if (!params.is_null()) msg["params"] = params;
  send(msg);
}

void Client::reader_loop() {
  FrameReader frames;
  char buf[65536];
  while (true) {
    const ssize_t n = ::read(from_server_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    frames.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    while (true) {
      std::optional<json> msg;
      try {
        msg = frames.next();
      } catch (const Error&) {
        continue;  // a corrupt body is skipped; the framing itself stays in sync
      }
      if (!msg) break;
      dispatch(std::move(*msg));
    }
  }
  closed_ = true;
  fail_pending(ErrorCode::TransportClosed, "language server closed the connection");
  diag_cv_.notify_all();
}

void Client::fail_pending(ErrorCode code, const std::string& why) {
  std::lock_guard lock(pending_mutex_);
  for (auto& [id, p] : pending_) p.set_exception(std::make_exception_ptr(Error(code, why)));
  pending_.clear();
}

void Client::dispatch(json message) {
  const bool has_method = message.contains("method");
  const bool has_id = message.contains("id") && !message["id"].is_null();
  if (!has_method && has_id) {
    long id = -1;
    if (message["id"].is_number_integer()) id = message["id"].get<long>();
    else if (message["id"].is_string()) id = std::stol(message["id"].get<std::string>());
    std::promise<json> p;
    {
      std::lock_guard lock(pending_mutex_);
      auto it = pending_.find(id);
      if (it == pending_.end()) return;  // late answer to a cancelled request
      p = std::move(it->second);
      pending_.erase(it);
    }
    if (message.contains("error")) {
      const auto& err = message["error"];
      p.set_exception(std::make_exception_ptr(Error(
          ErrorCode::ServerError, std::to_string(err.value("code", 0)) + " " + err.value("message", std::string()))));
    } else {
      p.set_value(message.value("result", json()));
    }
    return;
  }
  if (has_method && has_id) {
    answer_server_request(message);
    return;
  }
  if (!has_method) return;
  const std::string method = message["method"].get<std::string>();
  if (method == "textDocument/publishDiagnostics") {
    const auto& params = message["params"];
    const std::string uri = params.value("uri", std::string());
    std::vector<Diagnostic> diags;
    for (const auto& d : params.value("diagnostics", json::array())) {
      Diagnostic x;
      x.line = d["range"]["start"]["line"].get<int>() + 1;
      x.end_line = d["range"]["end"]["line"].get<int>() + 1;
      x.severity = d.value("severity", 1);
      x.message = d.value("message", std::string());
      diags.push_back(std::move(x));
    }
    {
      std::lock_guard lock(diag_mutex_);
      diagnostics_[uri] = std::move(diags);
      bool fresh = true;
      if (params.contains("version") && params["version"].is_number_integer()) {
        std::lock_guard dl(doc_mutex_);
        auto it = versions_.find(rel_path_of(uri));
        fresh = it == versions_.end() || params["version"].get<int>() >= it->second;
      }
      if (fresh) diag_generation_[uri] = generation_;
    }
    diag_cv_.notify_all();
    return;
  }
  std::lock_guard lock(note_mutex_);
  if (notifications_.size() >= kNotificationCapacity) {
    notifications_.pop_front();
    ++dropped_;
  }
  notifications_.push_back(std::move(message));
}

void Client::answer_server_request(const json& message) {
  const std::string method = message["method"].get<std::string>();
  json reply = {{"jsonrpc", "2.0"}, {"id", message["id"]}};
  if (method == "workspace/configuration") {
    json items = json::array();
    for (const auto& item : message["params"].value("items", json::array())) {
      const std::string section = item.value("section", std::string());
      json value = nullptr;
      if (section.empty()) {
        value = config_.settings;
      } else {
        // dotted sections walk into the settings object
        json cur = config_.settings;
        std::string_view rest = section;
        bool found = true;
        while (!rest.empty()) {
          auto dot = rest.find('.');
          std::string key(rest.substr(0, dot));
          if (!cur.is_object() || !cur.contains(key)) {
            found = false;
            break;
          }
          cur = cur[key];
          rest = dot == std::string_view::npos ? std::string_view{} : rest.substr(dot + 1);
        }
        if (found) value = cur;
      }
      items.push_back(value);
    }
    reply["result"] = items;
  } else if (method == "workspace/workspaceFolders") {
    reply["result"] = {{{"uri", path_to_uri(config_.root.string())}, {"name", config_.root.filename().string()}}};
  } else if (method == "client/registerCapability" || method == "client/unregisterCapability" ||
             method == "window/workDoneProgress/create" || method == "window/showMessageRequest") {
    reply["result"] = nullptr;
  } else {
    reply["error"] = {{"code", -32601}, {"message", "method not supported: " + method}};
  }
  try {
    send(reply);
  } catch (const Error&) {
  }
}

std::string Client::uri_of(const std::string& rel_path) const {
  return path_to_uri((config_.root / rel_path).lexically_normal().string());
}

std::string Client::rel_path_of(std::string_view uri) const {
  const std::filesystem::path p = uri_to_path(uri);
  return normalize_path(p.lexically_relative(config_.root).generic_string());
}

bool Client::is_open(const std::string& rel_path) const {
  std::lock_guard lock(doc_mutex_);
  return versions_.contains(rel_path);
}

void Client::sync_document(const std::string& rel_path, const std::string& text) {
  int version = 0;
  bool open = false;
  {
    std::lock_guard lock(doc_mutex_);
    auto it = texts_.find(rel_path);
    if (it != texts_.end() && it->second == text) return;
    open = versions_.contains(rel_path);
    version = ++versions_[rel_path];
    texts_[rel_path] = text;
  }
  {
    std::lock_guard lock(diag_mutex_);
    sync_generation_[uri_of(rel_path)] = ++generation_;
  }
  if (!open) {
    static constexpr std::string_view ids[] = {"python", "go", "java", "javascript", "typescript"};
    notify("textDocument/didOpen", {{"textDocument",
                                     {{"uri", uri_of(rel_path)},
                                      {"languageId", std::string(ids[static_cast<int>(config_.language)])},
                                      {"version", version},
                                      {"text", text}}}});
  } else {
    notify("textDocument/didChange", {{"textDocument", {{"uri", uri_of(rel_path)}, {"version", version}}},
                                      {"contentChanges", {{{"text", text}}}}});
  }
}

std::optional<std::vector<Diagnostic>> Client::diagnostics(const std::string& rel_path, int wait_ms) {
  const std::string uri = uri_of(rel_path);
  std::unique_lock lock(diag_mutex_);
  const auto fresh = [&] {
    const auto d = diag_generation_.find(uri);
    const auto s = sync_generation_.find(uri);
    return d != diag_generation_.end() && (s == sync_generation_.end() || d->second >= s->second);
  };
  diag_cv_.wait_for(lock, std::chrono::milliseconds(wait_ms), [&] { return fresh() || closed_.load(); });
  if (!fresh()) return std::nullopt;
  return diagnostics_[uri];
}

std::vector<json> Client::drain_notifications() {
  std::lock_guard lock(note_mutex_);
  std::vector<json> out(notifications_.begin(), notifications_.end());
  notifications_.clear();
  return out;
}

}  // namespace nextedit::lsp
