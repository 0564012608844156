#pragma once

// Event/trace data model, JSONL persistence and event-to-case grouping.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pattern_pilot/preferences.hpp"

namespace pilot {

using ValueSet = std::set<std::string>;

/// Data directly associated with an executed activity: participants, tool,
/// data and any execution attribute (e.g. "mode"), each a set of values.
/// An empty value set means "unknown".
struct InternalContext {
  std::map<std::string, ValueSet> dimensions;

  const ValueSet* find(std::string_view dimension) const;
  bool operator==(const InternalContext&) const = default;
};

/// Environment the process runs in (social, economic, political descriptors).
struct ExternalContext {
  std::string id;
  std::map<std::string, std::string> attributes;

  bool operator==(const ExternalContext&) const = default;
};

using ContextCatalog = std::map<std::string, ExternalContext>;

enum class Lifecycle { Step, CaseEnd };

struct Event {
  std::string case_id;
  std::uint64_t seq = 0;
  std::string activity;
  InternalContext internal_context;
  std::string external_context_id;
  std::optional<std::string> timestamp;
  Lifecycle lifecycle = Lifecycle::Step;
  std::optional<std::string> continues;

  bool operator==(const Event&) const = default;
};

struct Step {
  std::string activity;
  InternalContext context;
  std::uint64_t seq = 0;
  std::optional<std::string> timestamp;

  bool operator==(const Step&) const = default;
};

enum class CaseStatus { Ongoing, Completed };
enum class Outcome { Unknown, Success, Failure };

std::string_view to_string(CaseStatus status);
std::string_view to_string(Outcome outcome);

/// One enactment of a process (a case), steps in ascending seq order.
struct Trace {
  std::string case_id;
  std::vector<Step> steps;
  std::string external_context_id;
  CaseStatus status = CaseStatus::Ongoing;
  Outcome outcome = Outcome::Unknown;
  std::optional<std::string> continues;

  std::vector<std::string> activities() const;
  bool operator==(const Trace&) const = default;
};

/// Append-only, single-writer store of events. Each case must be
/// context-homogeneous, strictly increasing in seq, and closed by at most one
/// case_end event.
class EventLog {
 public:
  /// Throws Error(Duplicate) for an existing (case_id, seq), Error(Ordering)
  /// for a lower seq, a context change, or an event after case_end, and
  /// Error(Schema) for an empty activity or case id.
  void append(Event event);

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  std::size_t case_count() const { return cases_.size(); }
  bool contains_case(const std::string& case_id) const { return cases_.count(case_id) > 0; }

  /// One trace per case in ascending case_id order; outcome left Unknown.
  std::vector<Trace> traces() const;
  std::optional<Trace> trace(const std::string& case_id) const;

  const ContextCatalog& contexts() const { return contexts_; }
  void set_contexts(ContextCatalog catalog) { contexts_ = std::move(catalog); }
  /// Catalog entry, or an attribute-less context carrying just the id.
  ExternalContext context(const std::string& id) const;

  bool operator==(const EventLog& other) const {
    return events_ == other.events_ && contexts_ == other.contexts_;
  }

 private:
  struct CaseState {
    std::uint64_t max_seq = 0;
    std::string external_context_id;
    bool closed = false;
    std::vector<std::size_t> event_indices;
  };

  Trace build_trace(const std::string& case_id, const CaseState& state) const;

  std::vector<Event> events_;
  std::map<std::string, CaseState> cases_;
  ContextCatalog contexts_;
};

/// NFC normalization followed by whitespace trimming.
std::string normalize_name(std::string_view name);

/// Reads the internal-context fields (participants, tool, data, attrs) of an
/// event-shaped JSON object.
InternalContext internal_context_from_json(const nlohmann::json& object);
/// Writes the internal context back into event-shaped fields of `object`.
void write_internal_context(const InternalContext& context, nlohmann::json& object);

Event event_from_json(const nlohmann::json& object, std::optional<std::size_t> line = std::nullopt);
nlohmann::json to_json(const Event& event);
nlohmann::json to_json(const Trace& trace);
nlohmann::json to_json(const ExternalContext& context);

/// A trace step from a step-shaped object (activity plus context fields);
/// other fields are ignored.
Step step_from_json(const nlohmann::json& object, std::optional<std::size_t> line = std::nullopt);

/// Parses JSON-lines content, one event per non-blank line. Events of a case
/// may appear out of seq order in the input; they are ordered on load.
EventLog parse_log(std::string_view jsonl);
std::string serialize_log(const EventLog& log);
EventLog load_log(const std::string& path);

/// Steps of a JSON-lines trace file, in file order.
std::vector<Step> parse_steps(std::string_view jsonl);

/// `{"c1": {"attr": "value", ...}, ...}`
ContextCatalog parse_context_catalog(std::string_view text);
ContextCatalog context_catalog_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ContextCatalog& catalog);
ContextCatalog load_context_catalog(const std::string& path);

/// Seconds since the Unix epoch for "YYYY-MM-DDTHH:MM:SS[.fff]Z".
std::optional<std::int64_t> parse_utc_timestamp(std::string_view text);

/// success iff completed and every clause holds; failure iff completed and a
/// clause fails; unknown while ongoing.
Outcome evaluate_outcome(const Trace& trace, const SuccessPredicate& predicate);

std::string read_file(const std::string& path);

}  // namespace pilot
