#include <doctest.h>

#include <random>

#include "pattern_pilot/discovery.hpp"
#include "pattern_pilot/error.hpp"
#include "support/fixtures.hpp"
#include "support/random_logs.hpp"

using namespace pilot;

namespace {

Trace trace_of(std::vector<std::string> activities, std::string id = "t") {
  Trace t;
  t.case_id = std::move(id);
  t.external_context_id = "c1";
  for (std::size_t i = 0; i < activities.size(); ++i) t.steps.push_back(Step{activities[i], {}, i + 1, {}});
  return t;
}

bool flow_conserved(const ProcessModel& m) {
  for (const auto& node : m.nodes) {
    std::size_t out = 0;
    for (const auto& [edge, count] : m.edges) {
      if (edge.first == node) out += count;
    }
    auto occ = m.activity_counts.count(node) ? m.activity_counts.at(node) : 0;
    auto ends = m.end_counts.count(node) ? m.end_counts.at(node) : 0;
    if (out != occ - ends) return false;
  }
  for (const auto& [edge, count] : m.edges) {
    if (!m.nodes.count(edge.first) || !m.nodes.count(edge.second)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("discovery") {
  TEST_CASE("instance_model of a single step") {
    auto m = instance_model(trace_of({"A"}));
    CHECK(m.nodes == std::set<std::string>{"A"});
    CHECK(m.edges.empty());
    CHECK(m.start_counts.at("A") == 1);
    CHECK(m.end_counts.at("A") == 1);
  }

  TEST_CASE("instance_model of a loop") {
    auto m = instance_model(trace_of({"A", "B", "A"}));
    CHECK(m.edge_count("A", "B") == 1);
    CHECK(m.edge_count("B", "A") == 1);
    CHECK(m.edges.size() == 2);
    CHECK(m.start_counts.at("A") == 1);
    CHECK(m.end_counts.at("A") == 1);
    CHECK(flow_conserved(m));
  }

  TEST_CASE("instance_model of an empty trace is a domain error") {
    CHECK_THROWS_AS(instance_model(trace_of({})), Error);
  }

  TEST_CASE("c1 manual case is a five-node chain") {
    auto trace = fixtures::c1_log().trace("c1-01");
    REQUIRE(trace);
    auto m = instance_model(*trace);
    CHECK(m.nodes.size() == 5);
    CHECK(m.edges.size() == 4);
    for (const auto& [edge, count] : m.edges) CHECK(count == 1);
  }

  TEST_CASE("merge_models") {
    CHECK(merge_models({}).empty());
    auto m = instance_model(trace_of({"A", "B"}));
    std::vector<ProcessModel> with_empty{m, ProcessModel{}};
    CHECK(merge_models(with_empty) == m);

    auto traces = fixtures::c1_log().traces();
    auto merged = discover_model(traces);
    CHECK(merged.edge_count("partner search", "partner selection") == 6);
    CHECK(merged.edge_count("partner selection", "formulation of cooperation terms") == 3);
    CHECK(merged.edge_count("partner selection", "partner verification") == 3);
    CHECK(merged.start_counts.at("partner search") == 6);
    CHECK(merged.end_counts.at("contract signing") == 6);
    CHECK(merged.source_case_ids.size() == 6);
    CHECK(flow_conserved(merged));

    auto j = to_json(merged);
    CHECK(j.at("nodes").size() == merged.nodes.size());
    CHECK(j.at("starts").at("partner search") == 6);
    bool found = false;
    for (const auto& e : j.at("edges")) {
      if (e.at("from") == "partner search" && e.at("to") == "partner selection") found = e.at("count") == 6;
    }
    CHECK(found);
  }

  TEST_CASE("merge is commutative and associative; flow is conserved; replay stays on edges") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 200; ++round) {
      auto traces = testing::random_traces(rng);
      std::vector<ProcessModel> models;
      for (const auto& t : traces) models.push_back(instance_model(t));
      for (const auto& m : models) CHECK(flow_conserved(m));

      auto forward = merge_models(models);
      std::vector<ProcessModel> reversed(models.rbegin(), models.rend());
      CHECK(merge_models(reversed) == forward);
      if (models.size() >= 3) {
        std::vector<ProcessModel> left_pair{models[0], models[1]};
        std::vector<ProcessModel> left{merge_models(left_pair), models[2]};
        std::vector<ProcessModel> right_pair{models[1], models[2]};
        std::vector<ProcessModel> right{models[0], merge_models(right_pair)};
        CHECK(merge_models(left) == merge_models(right));
      }
      CHECK(flow_conserved(forward));
      for (const auto& t : traces) {
        for (std::size_t i = 0; i + 1 < t.steps.size(); ++i)
          CHECK(forward.edge_count(t.steps[i].activity, t.steps[i + 1].activity) > 0);
      }
    }
  }
}
