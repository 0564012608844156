#pragma once

// Reconstructed partner-selection logs for contexts c1 and c2.

#include <string>
#include <vector>

#include "pattern_pilot/event_log.hpp"
#include "pattern_pilot/pattern_miner.hpp"
#include "pattern_pilot/recommend.hpp"

namespace pilot::fixtures {

std::string path(const std::string& name);

EventLog c1_log();
EventLog c2_log();
/// c1 and c2 cases together, with the context catalog attached.
EventLog combined_log();
ContextCatalog contexts();

/// The c1 email-branch request: [partner search, partner selection], mode=email.
std::vector<Step> email_trace();
/// Three of c2's four attributes.
ExternalContext c2_like_context();

PatternRepository combined_repository(const Preferences& prefs = {});

/// c1 and c2 fixture lines as a JSON array of events (HTTP ingest body).
nlohmann::json events_body();
/// POST /recommendations body for the email-branch request in `context`.
nlohmann::json email_request_body(const nlohmann::json& context);

inline const std::vector<std::string> kPatternA{"partner search", "partner selection"};
inline const std::vector<std::string> kPatternB{"partner search", "partner selection",
                                                "formulation of cooperation terms", "cooperation terms agreement",
                                                "contract signing"};
inline const std::vector<std::string> kPatternC{"partner search",  "partner selection", "partner verification",
                                                "offer inquiry",   "answer to inquiry", "discussion",
                                                "contract signing"};
inline const std::vector<std::string> kPatternC2{"partner selection", "contract signing"};

}  // namespace pilot::fixtures
