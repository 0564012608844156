#pragma once

// Pattern-continuation recommendations for ongoing process instances.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pattern_pilot/context_match.hpp"
#include "pattern_pilot/event_log.hpp"
#include "pattern_pilot/pattern_miner.hpp"
#include "pattern_pilot/preferences.hpp"

namespace pilot {

struct RecommendationRequest {
  std::vector<Step> trace;  // may be empty (process start)
  ExternalContext external_context;
  std::optional<std::string> participant;
  std::optional<Preferences> prefs_override;
};

struct RecommendationItem {
  std::string pattern_id;
  std::vector<ActivityTemplate> continuation;
  double confidence = 0.0;
  std::string justification;
  MatchBreakdown breakdown;
  std::size_t support = 0;
};

/// Candidates are patterns frequent among successful instances alone
/// (successful_support >= min_support) that anchor on the trace, or every
/// such pattern when the trace is empty. Zero-confidence candidates are
/// dropped; the rest are ranked by (confidence desc, support desc, id asc)
/// and truncated to top_k.
std::vector<RecommendationItem> recommend(const RecommendationRequest& request, const PatternRepository& repo,
                                          const Preferences& prefs);

std::string justify(const RecommendationItem& item, const ActivityPattern& pattern,
                    const RecommendationRequest& request);

struct ReplayStep {
  std::size_t step_index = 0;  // length of the trace prefix
  std::string activity;        // last activity of the prefix
  std::vector<RecommendationItem> items;
};

/// recommend() for every non-empty prefix of a logged case, in its own
/// context. Throws Error(NotFound) for an unknown case.
std::vector<ReplayStep> replay(const EventLog& log, const std::string& case_id, const PatternRepository& repo,
                               const Preferences& prefs);

/// Request body: {trace:[step...], external_context: id | {id, attributes},
/// participant?, preferences?}. Context ids resolve through `catalog`.
RecommendationRequest request_from_json(const nlohmann::json& body, const ContextCatalog& catalog);

/// Resolves a context id against the catalogs in order, falling back to an
/// attribute-less context.
ExternalContext resolve_context(const std::string& id, const ContextCatalog& primary,
                                const ContextCatalog& fallback = {});

nlohmann::json to_json(const RecommendationItem& item);
/// `{"items":[...]}`, shared by the CLI and the HTTP API.
nlohmann::json recommendation_response(const std::vector<RecommendationItem>& items);

}  // namespace pilot
