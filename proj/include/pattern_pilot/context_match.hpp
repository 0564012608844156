#pragma once

// Context similarity, anchoring of ongoing traces on patterns, and the
// recommendation confidence indicator.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "pattern_pilot/event_log.hpp"
#include "pattern_pilot/pattern_miner.hpp"
#include "pattern_pilot/preferences.hpp"

namespace pilot {

/// 1.0 for equal ids, otherwise Jaccard similarity of the (key, value)
/// attribute pairs; 0.0 when both attribute sets are empty.
double external_similarity(const ExternalContext& a, const ExternalContext& b);

/// Per in-scope dimension: true if the query's values intersect the
/// template's modal values, false if not, absent if neither side has values.
std::map<std::string, bool> dimension_matches(const InternalContext& query, const ActivityTemplate& tmpl,
                                              std::span<const std::string> dims);

/// Mean of dimension_matches; 1.0 when every dimension is skipped.
/// Throws Error(Domain) when `dims` is empty.
double internal_similarity(const InternalContext& query, const ActivityTemplate& tmpl,
                           std::span<const std::string> dims);

/// The last `length` trace steps equal templates[template_index, +length).
/// length == 0 denotes the process-start anchor of an empty trace.
struct Anchor {
  std::size_t length = 0;
  std::size_t template_index = 0;
  bool operator==(const Anchor&) const = default;
};

/// Longest trace suffix that is an infix of the pattern and still leaves a
/// continuation; earliest position among equal lengths.
std::optional<Anchor> anchor_match(std::span<const Step> trace, const ActivityPattern& pattern);

struct DimensionTally {
  std::size_t matched = 0;
  std::size_t total = 0;
  bool operator==(const DimensionTally&) const = default;
};

struct MatchBreakdown {
  std::size_t anchor_length = 0;
  std::size_t template_index = 0;
  double internal_score = 1.0;
  double external_score = 1.0;
  double confidence = 1.0;
  std::map<std::string, DimensionTally> per_dimension;
  bool operator==(const MatchBreakdown&) const = default;
};

/// confidence = external × internal, optionally scaled by
/// (1 − λ) + λ · user_support / support when a requester is named.
MatchBreakdown confidence(std::span<const Step> trace, const ExternalContext& query_context,
                          const ExternalContext& pattern_context, const ActivityPattern& pattern, const Anchor& anchor,
                          const Preferences& prefs, const std::optional<std::string>& participant = std::nullopt);

nlohmann::json to_json(const MatchBreakdown& breakdown);

}  // namespace pilot
