#pragma once

// Closed frequent contiguous activity sequences ("activity patterns") and the
// repository they are stored in.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pattern_pilot/event_log.hpp"
#include "pattern_pilot/preferences.hpp"

namespace pilot {

/// (value, occurrence count), ordered by count desc then value asc.
using ValueCounts = std::vector<std::pair<std::string, std::size_t>>;

struct ActivityTemplate {
  std::string activity;
  std::map<std::string, ValueCounts> profile;

  /// Values sharing the top count in `dimension`; empty if the dimension was
  /// never observed.
  ValueSet modal_values(const std::string& dimension) const;
  bool operator==(const ActivityTemplate&) const = default;
};

struct ActivityPattern {
  std::string id;
  std::vector<ActivityTemplate> templates;
  std::size_t support = 0;
  std::size_t successful_support = 0;
  std::string external_context_id;
  std::set<std::string> source_case_ids;
  /// Number of source traces each participant took part in (any step).
  std::map<std::string, std::size_t> participant_support;
  bool closed = true;

  std::vector<std::string> activities() const;
  bool operator==(const ActivityPattern&) const = default;
};

/// Content-derived id: 16 hex digits of FNV-1a over context and activity names.
std::string pattern_id(const std::string& external_context_id, std::span<const std::string> activities);

/// Builds per-position context profiles from one occurrence per supporting
/// trace: `occurrences` holds (trace index, start position).
std::vector<ActivityTemplate> aggregate_templates(std::span<const Trace> traces,
                                                  std::span<const std::pair<std::size_t, std::size_t>> occurrences,
                                                  std::size_t length);

/// Returns the closed frequent contiguous sequences of every external context
/// with length >= prefs.min_length, sorted by (support desc, length desc, id
/// asc). Support counts distinct traces; ongoing traces count too.
std::vector<ActivityPattern> mine_patterns(std::span<const Trace> traces, const Preferences& prefs);

/// Sort order shared by the miner and its oracle.
void sort_patterns(std::vector<ActivityPattern>& patterns);

struct PatternRepository {
  static constexpr int kVersion = 1;

  Preferences preferences;
  std::string log_version;
  std::size_t event_count = 0;
  std::string mined_at;
  ContextCatalog contexts;
  std::vector<ActivityPattern> patterns;

  const ActivityPattern* find(const std::string& id) const;
  std::map<std::string, std::size_t> counts_by_context() const;
  /// Same metadata, only the patterns (and catalog entry) of one context.
  PatternRepository slice(const std::string& context_id) const;
  bool operator==(const PatternRepository&) const = default;
};

/// Digest of the serialized log; identifies the snapshot a repository was mined from.
std::string log_version(const EventLog& log);

/// Mines every context of `log`; mined_at is the latest event timestamp so
/// identical logs give identical repositories.
PatternRepository build_repository(const EventLog& log, const Preferences& prefs);

nlohmann::json to_json(const ActivityTemplate& t);
nlohmann::json to_json(const ActivityPattern& p);
nlohmann::json to_json(const PatternRepository& repo);
/// Throws Error(Version) for an unsupported "version" and Error(Schema) for
/// structural problems.
PatternRepository repository_from_json(const nlohmann::json& j);

std::string serialize_repository(const PatternRepository& repo);
void save_repository(const PatternRepository& repo, const std::string& path);
PatternRepository load_repository(const std::string& path);

}  // namespace pilot
