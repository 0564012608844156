#pragma once

// User preferences that parameterize mining and recommendation.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace pilot {

/// Classifies completed process instances as successful. The implicit clause
/// "status = completed" always applies; every present clause must hold too.
struct SuccessPredicate {
  std::optional<std::set<std::string>> terminal_activities;
  std::optional<std::set<std::string>> must_contain;
  std::optional<std::size_t> max_length;
  std::optional<std::int64_t> max_duration_s;

  bool operator==(const SuccessPredicate&) const = default;
};

struct Preferences {
  std::size_t min_support = 3;
  std::size_t min_length = 2;
  SuccessPredicate success;
  std::vector<std::string> context_dimensions{"participants", "tool", "data", "mode"};
  double external_weight = 0.5;  // reserved, not used by the default formula
  double user_crowd_lambda = 0.0;
  std::size_t top_k = 5;

  bool operator==(const Preferences&) const = default;
};

/// Throws Error(Domain) when a bound is violated.
void validate(const Preferences& prefs);

nlohmann::json to_json(const SuccessPredicate& predicate);
SuccessPredicate success_predicate_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Preferences& prefs);
/// Missing keys keep their defaults; unknown keys are ignored.
Preferences preferences_from_json(const nlohmann::json& j);
Preferences parse_preferences(std::string_view text);
Preferences load_preferences(const std::string& path);

}  // namespace pilot
