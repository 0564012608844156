#pragma once

// HTTP API over a file-backed data directory.

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pattern_pilot/error.hpp"
#include "pattern_pilot/event_log.hpp"
#include "pattern_pilot/pattern_miner.hpp"
#include "pattern_pilot/preferences.hpp"

namespace httplib {
class Server;
}

namespace pilot {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds any free port
  std::filesystem::path data_dir;
  std::optional<std::string> preferences_path;
  std::optional<std::string> contexts_path;
  int verbosity = 0;
  /// Runs inside a mining job while the job holds the mining slot. Tests use
  /// it to observe concurrent mine requests.
  std::function<void()> mine_hook;
};

struct ApiError {
  int status = 500;
  std::string code;
  std::string message;
  std::optional<std::size_t> line;
  std::optional<std::string> field;

  nlohmann::json to_json() const;
};

int http_status(ErrorCode code);
ApiError to_api_error(const Error& error);

/// Files kept in the data directory.
inline constexpr const char* kEventsFile = "events.jsonl";
inline constexpr const char* kRepositoryFile = "repository.json";
inline constexpr const char* kContextsFile = "contexts.json";
inline constexpr const char* kPreferencesFile = "preferences.json";

class Service {
 public:
  /// Loads the data directory. Throws Error(Io) if it is not writable and
  /// Error(Version) for an unsupported repository file.
  explicit Service(ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; returns the bound port. Throws Error(Io).
  int bind();
  /// Serves until stop(); bind() must have succeeded.
  void listen();
  /// Blocks until listen() is accepting connections.
  void wait_until_ready() const;
  void stop();

  std::size_t event_count() const;
  std::size_t pattern_count() const;

 private:
  void register_routes();
  std::shared_ptr<const EventLog> log_snapshot() const;
  std::shared_ptr<const PatternRepository> repo_snapshot() const;

  nlohmann::json ingest(const nlohmann::json& body);
  nlohmann::json mine(const nlohmann::json& body);

  ServiceConfig config_;
  Preferences default_prefs_;
  std::unique_ptr<httplib::Server> server_;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const EventLog> log_;
  std::shared_ptr<const PatternRepository> repo_;

  std::mutex append_mutex_;
  std::mutex mine_mutex_;
};

}  // namespace pilot
