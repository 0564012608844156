#include "pattern_pilot/cli.hpp"

#include <csignal>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "pattern_pilot/error.hpp"
#include "pattern_pilot/event_log.hpp"
#include "pattern_pilot/pattern_miner.hpp"
#include "pattern_pilot/recommend.hpp"
#include "pattern_pilot/service.hpp"

namespace pilot {

namespace {

struct GlobalOptions {
  std::string prefs_path;
  std::string format = "json";
};

Preferences base_preferences(const GlobalOptions& global) {
  return global.prefs_path.empty() ? Preferences{} : load_preferences(global.prefs_path);
}

std::string continuation_text(const RecommendationItem& item) {
  std::string text;
  for (const auto& t : item.continuation) {
    if (!text.empty()) text += " -> ";
    text += t.activity;
  }
  return text;
}

void print_table(const std::vector<RecommendationItem>& items, std::ostream& out) {
  if (items.empty()) {
    out << "(no recommendations)\n";
    return;
  }
  out << "rank  confidence  pattern           continuation\n";
  std::size_t rank = 0;
  for (const auto& item : items) {
    out << std::left << std::setw(6) << ++rank << std::setw(12) << std::fixed << std::setprecision(2)
        << item.confidence << std::setw(18) << item.pattern_id << continuation_text(item) << '\n';
    out << "      " << item.justification << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

int serve_until_signaled(ServiceConfig config, std::ostream& out) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(std::move(config));
  const int port = service.bind();
  out << "listening on port " << port << std::endl;
  std::thread watcher([&] {
    int received = 0;
    sigwait(&signals, &received);
    service.wait_until_ready();  // stop() is a no-op before listen() starts
    service.stop();
  });
  service.listen();
  // listen() can return on its own (socket failure); wake the watcher
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mines activity patterns from process event logs and recommends continuations", "pattern_pilot"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--prefs", global.prefs_path, "Preferences JSON file")->check(CLI::ExistingFile);
  app.add_option("--format", global.format, "Output format")->check(CLI::IsMember({"json", "table"}));

  std::string log_path, out_path, contexts_path;
  std::optional<std::size_t> min_support, min_length, top_k;
  auto* mine = app.add_subcommand("mine", "Mine a JSONL event log into a pattern repository");
  mine->add_option("--log", log_path, "Event log (JSONL)")->required();
  mine->add_option("--out", out_path, "Repository JSON to write")->required();
  mine->add_option("--contexts", contexts_path, "External context catalog JSON");
  mine->add_option("--min-support", min_support, "Minimum number of supporting instances");
  mine->add_option("--min-length", min_length, "Minimum number of activities in a pattern");

  std::string patterns_path, trace_path, context_id, participant;
  auto* rec = app.add_subcommand("recommend", "Recommend pattern continuations for an ongoing trace");
  rec->add_option("--patterns", patterns_path, "Repository JSON")->required();
  rec->add_option("--trace", trace_path, "Steps performed so far (JSONL)")->required();
  rec->add_option("--context", context_id, "External context id")->required();
  rec->add_option("--contexts", contexts_path, "External context catalog JSON");
  rec->add_option("--participant", participant, "Requesting participant");
  rec->add_option("--top-k", top_k, "Maximum number of items");

  std::string case_id;
  auto* rep = app.add_subcommand("replay", "Recommendations after every step of a logged case");
  rep->add_option("--log", log_path, "Event log (JSONL)")->required();
  rep->add_option("--case", case_id, "Case id")->required();
  rep->add_option("--patterns", patterns_path, "Repository JSON")->required();
  rep->add_option("--contexts", contexts_path, "External context catalog JSON");
  rep->add_option("--top-k", top_k, "Maximum number of items");

  ServiceConfig config;
  std::string data_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--data-dir", data_dir, "Data directory")->envname("PATTERN_PILOT_DATA_DIR")->required();
  serve->add_option("--port", config.port, "Listen port")->envname("PATTERN_PILOT_PORT");
  serve->add_option("--host", config.host, "Listen address");
  serve->add_option("--contexts", contexts_path, "External context catalog JSON");
  serve->add_flag("-v,--verbose", config.verbosity, "Log requests to stderr");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Preferences prefs = base_preferences(global);
    if (min_support) prefs.min_support = *min_support;
    if (min_length) prefs.min_length = *min_length;
    if (top_k) prefs.top_k = *top_k;
    validate(prefs);

    if (*mine) {
      EventLog log = load_log(log_path);
      if (!contexts_path.empty()) log.set_contexts(load_context_catalog(contexts_path));
      PatternRepository repo = build_repository(log, prefs);
      save_repository(repo, out_path);
      std::map<std::string, std::size_t> counts;
      for (const auto& t : log.traces()) counts[t.external_context_id] = 0;
      for (const auto& [ctx, n] : repo.counts_by_context()) counts[ctx] = n;
      if (counts.empty()) out << "0 patterns\n";
      for (const auto& [ctx, n] : counts) out << ctx << ": " << n << " patterns\n";
      return 0;
    }

    if (*rec) {
      PatternRepository repo = load_repository(patterns_path);
      ContextCatalog extra = contexts_path.empty() ? ContextCatalog{} : load_context_catalog(contexts_path);
      RecommendationRequest request;
      request.trace = parse_steps(read_file(trace_path));
      request.external_context = resolve_context(context_id, extra, repo.contexts);
      if (!participant.empty()) request.participant = participant;
      auto items = recommend(request, repo, prefs);
      if (global.format == "table") {
        print_table(items, out);
      } else {
        out << recommendation_response(items).dump() << '\n';
      }
      return items.empty() ? 2 : 0;
    }

    if (*rep) {
      EventLog log = load_log(log_path);
      if (!contexts_path.empty()) log.set_contexts(load_context_catalog(contexts_path));
      PatternRepository repo = load_repository(patterns_path);
      for (const auto& step : replay(log, case_id, repo, prefs)) {
        if (global.format == "table") {
          out << "# step " << step.step_index << ": " << step.activity << '\n';
          print_table(step.items, out);
        } else {
          nlohmann::json line{{"step", step.step_index},
                              {"activity", step.activity},
                              {"result", recommendation_response(step.items)}};
          out << line.dump() << '\n';
        }
      }
      return 0;
    }

    if (*serve) {
      config.data_dir = data_dir;
      if (!global.prefs_path.empty()) config.preferences_path = global.prefs_path;
      if (!contexts_path.empty()) config.contexts_path = contexts_path;
      return serve_until_signaled(std::move(config), out);
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace pilot
