#include "pattern_pilot/context_match.hpp"

#include <algorithm>
#include <set>

#include "pattern_pilot/error.hpp"

namespace pilot {

double external_similarity(const ExternalContext& a, const ExternalContext& b) {
  if (a.id == b.id) return 1.0;
  std::size_t shared = 0;
  for (const auto& [key, value] : a.attributes) {
    auto it = b.attributes.find(key);
    if (it != b.attributes.end() && it->second == value) ++shared;
  }
  const std::size_t united = a.attributes.size() + b.attributes.size() - shared;
  if (united == 0) return 0.0;
  return static_cast<double>(shared) / static_cast<double>(united);
}

std::map<std::string, bool> dimension_matches(const InternalContext& query, const ActivityTemplate& tmpl,
                                              std::span<const std::string> dims) {
  std::map<std::string, bool> out;
  for (const auto& dim : dims) {
    const ValueSet* asked = query.find(dim);
    const ValueSet modal = tmpl.modal_values(dim);
    const bool has_query = asked && !asked->empty();
    if (!has_query && modal.empty()) continue;
    bool hit = false;
    if (has_query) {
      hit = std::any_of(asked->begin(), asked->end(), [&](const std::string& v) { return modal.count(v) > 0; });
    }
    out[dim] = hit;
  }
  return out;
}

double internal_similarity(const InternalContext& query, const ActivityTemplate& tmpl,
                           std::span<const std::string> dims) {
  if (dims.empty()) throw Error(ErrorCode::Domain, "internal_similarity needs at least one dimension");
  const auto matches = dimension_matches(query, tmpl, dims);
  if (matches.empty()) return 1.0;
  const auto hits = std::count_if(matches.begin(), matches.end(), [](const auto& m) { return m.second; });
  return static_cast<double>(hits) / static_cast<double>(matches.size());
}

std::optional<Anchor> anchor_match(std::span<const Step> trace, const ActivityPattern& pattern) {
  const std::size_t n = pattern.templates.size();
  if (trace.empty() || n < 2) return std::nullopt;
  const std::size_t longest = std::min(trace.size(), n - 1);
  for (std::size_t k = longest; k >= 1; --k) {
    const auto suffix = trace.subspan(trace.size() - k);
    for (std::size_t i = 0; i + k < n; ++i) {
      bool equal = true;
      for (std::size_t j = 0; j < k && equal; ++j) equal = suffix[j].activity == pattern.templates[i + j].activity;
      if (equal) return Anchor{k, i};
    }
  }
  return std::nullopt;
}

MatchBreakdown confidence(std::span<const Step> trace, const ExternalContext& query_context,
                          const ExternalContext& pattern_context, const ActivityPattern& pattern, const Anchor& anchor,
                          const Preferences& prefs, const std::optional<std::string>& participant) {
  if (anchor.length > trace.size() || anchor.template_index + anchor.length > pattern.templates.size())
    throw Error(ErrorCode::Domain, "anchor does not fit pattern " + pattern.id);

  MatchBreakdown b;
  b.anchor_length = anchor.length;
  b.template_index = anchor.template_index;

  const auto anchored = trace.subspan(trace.size() - anchor.length);
  double sum = 0.0;
  for (std::size_t j = 0; j < anchored.size(); ++j) {
    const auto& tmpl = pattern.templates[anchor.template_index + j];
    const auto matches = dimension_matches(anchored[j].context, tmpl, prefs.context_dimensions);
    for (const auto& [dim, hit] : matches) {
      auto& tally = b.per_dimension[dim];
      ++tally.total;
      if (hit) ++tally.matched;
    }
    sum += internal_similarity(anchored[j].context, tmpl, prefs.context_dimensions);
  }
  b.internal_score = anchored.empty() ? 1.0 : sum / static_cast<double>(anchored.size());
  b.external_score = external_similarity(query_context, pattern_context);
  b.confidence = b.external_score * b.internal_score;

  if (prefs.user_crowd_lambda > 0.0 && participant && pattern.support > 0) {
    std::size_t user_support = 0;
    if (auto it = pattern.participant_support.find(*participant); it != pattern.participant_support.end())
      user_support = it->second;
    const double lambda = prefs.user_crowd_lambda;
    b.confidence *= (1.0 - lambda) + lambda * static_cast<double>(user_support) / static_cast<double>(pattern.support);
  }
  b.confidence = std::clamp(b.confidence, 0.0, 1.0);
  return b;
}

nlohmann::json to_json(const MatchBreakdown& b) {
  nlohmann::json dims = nlohmann::json::object();
  for (const auto& [dim, tally] : b.per_dimension) dims[dim] = {{"matched", tally.matched}, {"total", tally.total}};
  return nlohmann::json{{"anchor_length", b.anchor_length},
                        {"template_index", b.template_index},
                        {"internal_score", b.internal_score},
                        {"external_score", b.external_score},
                        {"confidence", b.confidence},
                        {"per_dimension", std::move(dims)}};
}

}  // namespace pilot
