#include "support/fixtures.hpp"

#include <sstream>

namespace pilot::fixtures {

std::string path(const std::string& name) { return std::string(PILOT_FIXTURES) + "/" + name; }

EventLog c1_log() { return load_log(path("c1.jsonl")); }
EventLog c2_log() { return load_log(path("c2.jsonl")); }

ContextCatalog contexts() { return load_context_catalog(path("contexts.json")); }

EventLog combined_log() {
  EventLog log = parse_log(read_file(path("c1.jsonl")) + read_file(path("c2.jsonl")));
  log.set_contexts(contexts());
  return log;
}

std::vector<Step> email_trace() { return parse_steps(read_file(path("email_request.jsonl"))); }

ExternalContext c2_like_context() { return load_context_catalog(path("c2_like_context.json")).at("c2-like"); }

PatternRepository combined_repository(const Preferences& prefs) { return build_repository(combined_log(), prefs); }

nlohmann::json events_body() {
  nlohmann::json events = nlohmann::json::array();
  for (const char* name : {"c1.jsonl", "c2.jsonl"}) {
    std::istringstream lines(read_file(path(name)));
    for (std::string line; std::getline(lines, line);) {
      if (!line.empty()) events.push_back(nlohmann::json::parse(line));
    }
  }
  return events;
}

nlohmann::json email_request_body(const nlohmann::json& context) {
  nlohmann::json trace = nlohmann::json::array();
  std::istringstream lines(read_file(path("email_request.jsonl")));
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) trace.push_back(nlohmann::json::parse(line));
  }
  return nlohmann::json{{"trace", std::move(trace)}, {"external_context", context}};
}

}  // namespace pilot::fixtures
