#include "pattern_pilot/recommend.hpp"

#include <algorithm>
#include <sstream>

#include "pattern_pilot/error.hpp"

namespace pilot {

using nlohmann::json;

namespace {

std::string join_or_none(const std::vector<std::string>& names) {
  if (names.empty()) return "none";
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

ExternalContext resolve_context(const std::string& id, const ContextCatalog& primary, const ContextCatalog& fallback) {
  if (auto it = primary.find(id); it != primary.end()) return it->second;
  if (auto it = fallback.find(id); it != fallback.end()) return it->second;
  return ExternalContext{id, {}};
}

std::string justify(const RecommendationItem& item, const ActivityPattern& pattern,
                    const RecommendationRequest& request) {
  std::vector<std::string> matched;
  std::vector<std::string> differing;
  for (const auto& [dim, tally] : item.breakdown.per_dimension) {
    (tally.matched == tally.total ? matched : differing).push_back(dim);
  }
  std::ostringstream out;
  out << "Observed in " << pattern.successful_support << " successful instance(s) in context "
      << pattern.external_context_id << "; ";
  if (request.trace.empty() || item.breakdown.anchor_length == 0) {
    out << "anchored at process start";
  } else {
    const auto& last = pattern.templates[item.breakdown.template_index + item.breakdown.anchor_length - 1];
    out << "anchored at '" << last.activity << "'";
  }
  out << "; matched dimensions: " << join_or_none(matched) << "; differing: " << join_or_none(differing) << ".";
  return out.str();
}

std::vector<RecommendationItem> recommend(const RecommendationRequest& request, const PatternRepository& repo,
                                          const Preferences& base_prefs) {
  const Preferences& prefs = request.prefs_override ? *request.prefs_override : base_prefs;
  validate(prefs);

  std::vector<RecommendationItem> items;
  for (const auto& pattern : repo.patterns) {
    if (pattern.successful_support < prefs.min_support) continue;
    Anchor anchor;
    if (!request.trace.empty()) {
      auto found = anchor_match(request.trace, pattern);
      if (!found) continue;
      anchor = *found;
    }
    const ExternalContext pattern_context = resolve_context(pattern.external_context_id, repo.contexts);
    RecommendationItem item;
    item.pattern_id = pattern.id;
    item.support = pattern.support;
    item.breakdown = confidence(request.trace, request.external_context, pattern_context, pattern, anchor, prefs,
                                request.participant);
    item.confidence = item.breakdown.confidence;
    if (item.confidence <= 0.0) continue;
    item.continuation.assign(pattern.templates.begin() + static_cast<std::ptrdiff_t>(anchor.template_index + anchor.length),
                             pattern.templates.end());
    item.justification = justify(item, pattern, request);
    items.push_back(std::move(item));
  }

  std::sort(items.begin(), items.end(), [](const RecommendationItem& a, const RecommendationItem& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.support != b.support) return a.support > b.support;
    return a.pattern_id < b.pattern_id;
  });
  if (items.size() > prefs.top_k) items.resize(prefs.top_k);
  return items;
}

std::vector<ReplayStep> replay(const EventLog& log, const std::string& case_id, const PatternRepository& repo,
                               const Preferences& prefs) {
  auto trace = log.trace(case_id);
  if (!trace) throw Error(ErrorCode::NotFound, "unknown case '" + case_id + "'");
  RecommendationRequest request;
  request.external_context = resolve_context(trace->external_context_id, log.contexts(), repo.contexts);

  std::vector<ReplayStep> out;
  for (const auto& step : trace->steps) {
    request.trace.push_back(step);
    out.push_back(ReplayStep{request.trace.size(), step.activity, recommend(request, repo, prefs)});
  }
  return out;
}

RecommendationRequest request_from_json(const json& body, const ContextCatalog& catalog) {
  if (!body.is_object()) throw Error(ErrorCode::Schema, "recommendation request must be a JSON object");
  RecommendationRequest request;
  if (auto it = body.find("trace"); it != body.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::Schema, "trace must be an array of steps", {}, "trace");
    for (const auto& step : *it) request.trace.push_back(step_from_json(step));
  }
  auto ctx = body.find("external_context");
  if (ctx == body.end()) throw Error(ErrorCode::Schema, "missing required field 'external_context'", {}, "external_context");
  if (ctx->is_string()) {
    request.external_context = resolve_context(ctx->get<std::string>(), catalog);
  } else if (ctx->is_object()) {
    auto id = ctx->find("id");
    if (id == ctx->end() || !id->is_string())
      throw Error(ErrorCode::Schema, "external_context.id must be a string", {}, "external_context");
    request.external_context.id = id->get<std::string>();
    if (auto attrs = ctx->find("attributes"); attrs != ctx->end()) {
      request.external_context.attributes =
          context_catalog_from_json(json{{request.external_context.id, *attrs}}).at(request.external_context.id).attributes;
    } else {
      request.external_context = resolve_context(request.external_context.id, catalog);
    }
  } else {
    throw Error(ErrorCode::Schema, "external_context must be an id or an object", {}, "external_context");
  }
  if (auto it = body.find("participant"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::Schema, "participant must be a string", {}, "participant");
    request.participant = it->get<std::string>();
  }
  if (auto it = body.find("preferences"); it != body.end() && !it->is_null())
    request.prefs_override = preferences_from_json(*it);
  return request;
}

json to_json(const RecommendationItem& item) {
  json continuation = json::array();
  for (const auto& t : item.continuation) continuation.push_back(to_json(t));
  return json{{"pattern_id", item.pattern_id},
              {"continuation", std::move(continuation)},
              {"confidence", item.confidence},
              {"justification", item.justification},
              {"breakdown", to_json(item.breakdown)}};
}

json recommendation_response(const std::vector<RecommendationItem>& items) {
  json arr = json::array();
  for (const auto& item : items) arr.push_back(to_json(item));
  return json{{"items", std::move(arr)}};
}

}  // namespace pilot
