#include "pattern_pilot/service.hpp"

#include <fstream>
#include <iostream>

#include <httplib.h>

#include "pattern_pilot/discovery.hpp"
#include "pattern_pilot/recommend.hpp"

namespace pilot {

using nlohmann::json;

namespace fs = std::filesystem;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return 400;
    case ErrorCode::Schema:
    case ErrorCode::Domain: return 422;
    case ErrorCode::Duplicate:
    case ErrorCode::Ordering:
    case ErrorCode::Busy: return 409;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Io:
    case ErrorCode::Version: return 500;
  }
  return 500;
}

ApiError to_api_error(const Error& error) {
  return ApiError{http_status(error.code()), std::string(to_string(error.code())), error.what(), error.line(),
                  error.field()};
}

json ApiError::to_json() const {
  json body{{"code", code}, {"message", message}};
  if (line) body["line"] = *line;
  if (field) body["field"] = *field;
  return json{{"error", std::move(body)}};
}

namespace {

json parse_body(const std::string& body, bool allow_empty) {
  if (allow_empty && body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::Parse, "request body is not valid JSON");
  return j;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& err) { send_json(res, err.status, err.to_json()); }

/// Runs a handler, mapping failures to ApiError bodies.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, to_api_error(e));
  } catch (const std::exception& e) {
    send_error(res, ApiError{500, "INTERNAL", e.what(), {}, {}});
  }
}

std::optional<std::string> query_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  // no SO_REUSEPORT: a second instance on a taken port must fail to bind
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  std::error_code ec;
  fs::create_directories(config_.data_dir, ec);
  const fs::path probe = config_.data_dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok") || !out.flush())
      throw Error(ErrorCode::Io, "data directory " + config_.data_dir.string() + " is not writable");
  }
  fs::remove(probe, ec);

  if (config_.preferences_path) {
    default_prefs_ = load_preferences(*config_.preferences_path);
  } else if (fs::exists(config_.data_dir / kPreferencesFile)) {
    default_prefs_ = load_preferences((config_.data_dir / kPreferencesFile).string());
  }

  auto log = std::make_shared<EventLog>();
  if (fs::exists(config_.data_dir / kEventsFile)) *log = load_log((config_.data_dir / kEventsFile).string());
  if (config_.contexts_path) {
    log->set_contexts(load_context_catalog(*config_.contexts_path));
  } else if (fs::exists(config_.data_dir / kContextsFile)) {
    log->set_contexts(load_context_catalog((config_.data_dir / kContextsFile).string()));
  }
  log_ = std::move(log);

  if (fs::exists(config_.data_dir / kRepositoryFile)) {
    repo_ = std::make_shared<const PatternRepository>(load_repository((config_.data_dir / kRepositoryFile).string()));
  } else {
    auto empty = std::make_shared<PatternRepository>();
    empty->preferences = default_prefs_;
    empty->contexts = log_->contexts();
    repo_ = std::move(empty);
  }
  register_routes();
}

Service::~Service() = default;

std::shared_ptr<const EventLog> Service::log_snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return log_;
}

std::shared_ptr<const PatternRepository> Service::repo_snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return repo_;
}

std::size_t Service::event_count() const { return log_snapshot()->size(); }
std::size_t Service::pattern_count() const { return repo_snapshot()->patterns.size(); }

json Service::ingest(const json& body) {
  json events = body.is_array() ? body : json::array({body});
  std::lock_guard writer(append_mutex_);
  auto next = std::make_shared<EventLog>(*log_snapshot());
  std::string lines;
  std::size_t index = 0;
  for (const auto& item : events) {
    ++index;
    try {
      Event e = event_from_json(item);
      next->append(e);
      lines += to_json(next->events().back()).dump();
      lines += '\n';
    } catch (const Error& err) {
      throw Error(err.code(), "event #" + std::to_string(index) + ": " + err.what(), err.line(), err.field());
    }
  }
  const fs::path path = config_.data_dir / kEventsFile;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out || !(out << lines) || !out.flush()) throw Error(ErrorCode::Io, "cannot append to " + path.string());
  {
    std::lock_guard lock(snapshot_mutex_);
    log_ = std::move(next);
  }
  return json{{"accepted", events.size()}};
}

json Service::mine(const json& body) {
  std::unique_lock job(mine_mutex_, std::try_to_lock);
  if (!job.owns_lock()) throw Error(ErrorCode::Busy, "a mining job is already running");
  Preferences prefs = default_prefs_;
  if (body.is_object()) {
    if (auto it = body.find("preferences"); it != body.end() && !it->is_null()) prefs = preferences_from_json(*it);
  }
  auto log = log_snapshot();
  auto repo = std::make_shared<const PatternRepository>(build_repository(*log, prefs));
  if (config_.mine_hook) config_.mine_hook();
  save_repository(*repo, (config_.data_dir / kRepositoryFile).string());

  json counts = json::object();
  for (const auto& t : log->traces()) counts[t.external_context_id] = 0;
  for (const auto& [ctx, n] : repo->counts_by_context()) counts[ctx] = n;
  {
    std::lock_guard lock(snapshot_mutex_);
    repo_ = std::move(repo);
  }
  return json{{"patterns_by_context", std::move(counts)}};
}

void Service::register_routes() {
  auto& srv = *server_;

  srv.Get("/api/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, json{{"status", "ok"}, {"patterns", pattern_count()}, {"events", event_count()}});
  });

  srv.Post("/api/v1/events", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 201, ingest(parse_body(req.body, false))); });
  });

  srv.Post("/api/v1/mine", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, mine(parse_body(req.body, true))); });
  });

  srv.Get("/api/v1/patterns", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto repo = repo_snapshot();
      auto context = query_param(req, "context");
      send_json(res, 200, to_json(context ? repo->slice(*context) : *repo));
    });
  });

  srv.Get("/api/v1/model", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto traces = log_snapshot()->traces();
      if (auto context = query_param(req, "context")) {
        std::erase_if(traces, [&](const Trace& t) { return t.external_context_id != *context; });
      }
      send_json(res, 200, to_json(discover_model(traces)));
    });
  });

  srv.Get("/api/v1/cases", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json cases = json::array();
      for (const auto& t : log_snapshot()->traces()) {
        cases.push_back({{"case_id", t.case_id},
                         {"external_context", t.external_context_id},
                         {"status", to_string(t.status)},
                         {"outcome", to_string(evaluate_outcome(t, default_prefs_.success))},
                         {"length", t.steps.size()}});
      }
      send_json(res, 200, json{{"cases", std::move(cases)}});
    });
  });

  srv.Get(R"(/api/v1/cases/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      auto trace = log_snapshot()->trace(id);
      if (!trace) throw Error(ErrorCode::NotFound, "unknown case '" + id + "'");
      trace->outcome = evaluate_outcome(*trace, default_prefs_.success);
      send_json(res, 200, to_json(*trace));
    });
  });

  srv.Post("/api/v1/recommendations", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto repo = repo_snapshot();
      auto log = log_snapshot();
      ContextCatalog catalog = repo->contexts;
      for (const auto& [id, ctx] : log->contexts()) catalog.insert_or_assign(id, ctx);
      auto request = request_from_json(parse_body(req.body, false), catalog);
      send_json(res, 200, recommendation_response(recommend(request, *repo, default_prefs_)));
    });
  });

  srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty())
      send_error(res, ApiError{404, "NOT_FOUND", "no route for " + req.method + " " + req.path, {}, {}});
  });

  if (config_.verbosity > 0) {
    srv.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      std::cerr << req.method << ' ' << req.path << ' ' << res.status << '\n';
    });
  }
}

int Service::bind() {
  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.host);
    if (port < 0) throw Error(ErrorCode::Io, "cannot bind " + config_.host);
  } else if (!server_->bind_to_port(config_.host, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + config_.host + ":" + std::to_string(port));
  }
  return port;
}

void Service::listen() { server_->listen_after_bind(); }

void Service::wait_until_ready() const { server_->wait_until_ready(); }

void Service::stop() { server_->stop(); }

}  // namespace pilot
