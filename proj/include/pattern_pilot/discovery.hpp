#pragma once

// Frequency-annotated directly-follows process models.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "pattern_pilot/event_log.hpp"

namespace pilot {

struct ProcessModel {
  using Edge = std::pair<std::string, std::string>;

  std::set<std::string> nodes;
  std::map<Edge, std::size_t> edges;
  std::map<std::string, std::size_t> start_counts;
  std::map<std::string, std::size_t> end_counts;
  /// Occurrences of each activity across the source traces.
  std::map<std::string, std::size_t> activity_counts;
  std::set<std::string> source_case_ids;

  std::size_t edge_count(const std::string& from, const std::string& to) const;
  bool empty() const { return nodes.empty(); }
  bool operator==(const ProcessModel&) const = default;
};

/// Linear chain model of one trace. Throws Error(Domain) for an empty trace.
ProcessModel instance_model(const Trace& trace);

/// Union of nodes with all counts summed; order-independent.
ProcessModel merge_models(std::span<const ProcessModel> models);

/// merge_models over instance_model of every non-empty trace.
ProcessModel discover_model(std::span<const Trace> traces);

/// `{"nodes":[...],"edges":[{"from":..,"to":..,"count":n}],"starts":{...},"ends":{...}}`
nlohmann::json to_json(const ProcessModel& model);

}  // namespace pilot
