#include "pattern_pilot/preferences.hpp"

#include <fstream>
#include <sstream>

#include "pattern_pilot/error.hpp"

namespace pilot {

using nlohmann::json;

void validate(const Preferences& prefs) {
  if (prefs.min_support < 1) throw Error(ErrorCode::Domain, "min_support must be >= 1", {}, "min_support");
  if (prefs.min_length < 1) throw Error(ErrorCode::Domain, "min_length must be >= 1", {}, "min_length");
  if (!(prefs.external_weight >= 0.0 && prefs.external_weight <= 1.0))
    throw Error(ErrorCode::Domain, "external_weight must lie in [0,1]", {}, "external_weight");
  if (!(prefs.user_crowd_lambda >= 0.0 && prefs.user_crowd_lambda <= 1.0))
    throw Error(ErrorCode::Domain, "lambda must lie in [0,1]", {}, "lambda");
  for (const auto& dim : prefs.context_dimensions) {
    if (dim.empty()) throw Error(ErrorCode::Domain, "dimension names must be non-empty", {}, "dimensions");
  }
}

namespace {

std::set<std::string> string_set(const json& j, const char* field) {
  if (!j.is_array()) throw Error(ErrorCode::Schema, std::string(field) + " must be an array of strings", {}, field);
  std::set<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw Error(ErrorCode::Schema, std::string(field) + " must be an array of strings", {}, field);
    out.insert(v.get<std::string>());
  }
  return out;
}

std::size_t count_field(const json& j, const char* field) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    throw Error(ErrorCode::Schema, std::string(field) + " must be a non-negative integer", {}, field);
  return j.get<std::size_t>();
}

double unit_field(const json& j, const char* field) {
  if (!j.is_number()) throw Error(ErrorCode::Schema, std::string(field) + " must be a number", {}, field);
  return j.get<double>();
}

}  // namespace

json to_json(const SuccessPredicate& p) {
  json j = json::object();
  if (p.terminal_activities) j["terminal"] = *p.terminal_activities;
  if (p.must_contain) j["must_contain"] = *p.must_contain;
  if (p.max_length) j["max_length"] = *p.max_length;
  if (p.max_duration_s) j["max_duration_s"] = *p.max_duration_s;
  return j;
}

SuccessPredicate success_predicate_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, "success must be an object", {}, "success");
  SuccessPredicate p;
  if (auto it = j.find("terminal"); it != j.end()) p.terminal_activities = string_set(*it, "terminal");
  if (auto it = j.find("must_contain"); it != j.end()) p.must_contain = string_set(*it, "must_contain");
  if (auto it = j.find("max_length"); it != j.end()) p.max_length = count_field(*it, "max_length");
  if (auto it = j.find("max_duration_s"); it != j.end()) {
    if (!it->is_number_integer()) throw Error(ErrorCode::Schema, "max_duration_s must be an integer", {}, "max_duration_s");
    p.max_duration_s = it->get<std::int64_t>();
  }
  return p;
}

json to_json(const Preferences& p) {
  return json{{"min_support", p.min_support},
              {"min_length", p.min_length},
              {"success", to_json(p.success)},
              {"dimensions", p.context_dimensions},
              {"external_weight", p.external_weight},
              {"lambda", p.user_crowd_lambda},
              {"top_k", p.top_k}};
}

Preferences preferences_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, "preferences must be a JSON object");
  Preferences p;
  if (auto it = j.find("min_support"); it != j.end()) p.min_support = count_field(*it, "min_support");
  if (auto it = j.find("min_length"); it != j.end()) p.min_length = count_field(*it, "min_length");
  if (auto it = j.find("success"); it != j.end()) p.success = success_predicate_from_json(*it);
  if (auto it = j.find("dimensions"); it != j.end()) {
    string_set(*it, "dimensions");  // type check
    // caller's order, duplicates dropped
    p.context_dimensions.clear();
    std::set<std::string> seen;
    for (const auto& v : *it) {
      auto s = v.get<std::string>();
      if (seen.insert(s).second) p.context_dimensions.push_back(s);
    }
  }
  if (auto it = j.find("external_weight"); it != j.end()) p.external_weight = unit_field(*it, "external_weight");
  if (auto it = j.find("lambda"); it != j.end()) p.user_crowd_lambda = unit_field(*it, "lambda");
  if (auto it = j.find("top_k"); it != j.end()) p.top_k = count_field(*it, "top_k");
  validate(p);
  return p;
}

Preferences parse_preferences(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::Parse, "preferences are not valid JSON");
  return preferences_from_json(j);
}

Preferences load_preferences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read preferences file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_preferences(buf.str());
}

}  // namespace pilot
