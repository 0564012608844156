#include "pattern_pilot/discovery.hpp"

#include <vector>

#include "pattern_pilot/error.hpp"

namespace pilot {

std::size_t ProcessModel::edge_count(const std::string& from, const std::string& to) const {
  auto it = edges.find({from, to});
  return it == edges.end() ? 0 : it->second;
}

ProcessModel instance_model(const Trace& trace) {
  if (trace.steps.empty()) throw Error(ErrorCode::Domain, "cannot build a model of empty trace '" + trace.case_id + "'");
  ProcessModel model;
  model.source_case_ids.insert(trace.case_id);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& activity = trace.steps[i].activity;
    model.nodes.insert(activity);
    ++model.activity_counts[activity];
    if (i + 1 < trace.steps.size()) ++model.edges[{activity, trace.steps[i + 1].activity}];
  }
  ++model.start_counts[trace.steps.front().activity];
  ++model.end_counts[trace.steps.back().activity];
  return model;
}

ProcessModel merge_models(std::span<const ProcessModel> models) {
  ProcessModel merged;
  auto add_all = [](auto& into, const auto& from) {
    for (const auto& [key, count] : from) into[key] += count;
  };
  for (const auto& m : models) {
    merged.nodes.insert(m.nodes.begin(), m.nodes.end());
    add_all(merged.edges, m.edges);
    add_all(merged.start_counts, m.start_counts);
    add_all(merged.end_counts, m.end_counts);
    add_all(merged.activity_counts, m.activity_counts);
    merged.source_case_ids.insert(m.source_case_ids.begin(), m.source_case_ids.end());
  }
  return merged;
}

ProcessModel discover_model(std::span<const Trace> traces) {
  std::vector<ProcessModel> models;
  models.reserve(traces.size());
  for (const auto& t : traces) {
    if (!t.steps.empty()) models.push_back(instance_model(t));
  }
  return merge_models(models);
}

nlohmann::json to_json(const ProcessModel& model) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [edge, count] : model.edges) {
    edges.push_back({{"from", edge.first}, {"to", edge.second}, {"count", count}});
  }
  return nlohmann::json{{"nodes", model.nodes},
                        {"edges", std::move(edges)},
                        {"starts", model.start_counts},
                        {"ends", model.end_counts}};
}

}  // namespace pilot
