#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nextedit/lsp/jsonrpc.hpp"

namespace nextedit::lsp {

struct ServerConfig {
  Language language = Language::Python;
  std::vector<std::string> command;
  json initialization_options = json::object();
  /// Answer to workspace/configuration requests, looked up by section.
  json settings = json::object();
  std::filesystem::path root;
  int timeout_ms = 5000;
  int handshake_timeout_ms = 30000;

  void validate() const;
};

/// Known servers for `lang` found on PATH, in preference order.
std::optional<ServerConfig> default_server_config(Language lang, const std::filesystem::path& root);

/// {"python": {"command": [...], "initialization_options": {...},
///  "settings": {...}, "timeout_ms": 5000}, ...}
std::map<Language, ServerConfig> load_server_configs(const json& config, const std::filesystem::path& root);

struct Diagnostic {
  int line = 1;  // 1-based
  int end_line = 1;
  int severity = 1;
  std::string message;
};

/// One language-server process spoken to over stdio. Requests may be issued
/// from several threads; a reader thread correlates responses by id.
class Client {
 public:
  /// Launches and runs the initialize/initialized handshake.
  static std::unique_ptr<Client> start(const ServerConfig& config);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  /// Throws ServerError, Timeout or TransportClosed.
  json request(const std::string& method, const json& params, std::optional<int> timeout_ms = std::nullopt);
  std::future<json> request_async(const std::string& method, const json& params);
  void notify(const std::string& method, const json& params);

  const json& capabilities() const noexcept { return capabilities_; }
  const ServerConfig& config() const noexcept { return config_; }
  bool alive() const noexcept { return !closed_; }

  /// Opens the document or replaces its full text.
  void sync_document(const std::string& rel_path, const std::string& text);
  bool is_open(const std::string& rel_path) const;
  std::string uri_of(const std::string& rel_path) const;
  std::string rel_path_of(std::string_view uri) const;

  /// Latest published diagnostics for the file. Waits up to `wait_ms` for a
  /// publish newer than the last sync; returns nullopt if none arrived.
  std::optional<std::vector<Diagnostic>> diagnostics(const std::string& rel_path, int wait_ms);

  /// Server notifications other than diagnostics, oldest first.
  std::vector<json> drain_notifications();
  std::size_t dropped_notifications() const noexcept { return dropped_; }
  static constexpr std::size_t kNotificationCapacity = 1024;

  /// Graceful shutdown/exit; the destructor does this too.
  void shutdown();
  /// Hard kill, for fault injection.
  void kill();

 private:
  explicit Client(ServerConfig config);
  void launch();
  void handshake();
  void reader_loop();
  void dispatch(json message);
  void answer_server_request(const json& message);
  std::future<json> issue(const std::string& method, const json& params, long& id_out);
  void send(const json& message);
  void fail_pending(ErrorCode code, const std::string& why);

  ServerConfig config_;
  json capabilities_;
  int pid_ = -1;
  int to_server_ = -1;
  int from_server_ = -1;
  std::thread reader_;
  std::atomic<bool> closed_{false};
  std::atomic<bool> shutting_down_{false};

  std::mutex write_mutex_;
  std::mutex pending_mutex_;
  std::map<long, std::promise<json>> pending_;
  std::atomic<long> next_id_{1};

  mutable std::mutex doc_mutex_;
  std::map<std::string, int> versions_;
  std::map<std::string, std::string> texts_;

  std::mutex diag_mutex_;
  std::condition_variable diag_cv_;
  std::map<std::string, std::vector<Diagnostic>> diagnostics_;  // by uri
  std::map<std::string, long> diag_generation_;
  std::map<std::string, long> sync_generation_;
  long generation_ = 0;

  std::mutex note_mutex_;
  std::deque<json> notifications_;
  std::atomic<std::size_t> dropped_{0};
};

}  // namespace nextedit::lsp
