#include "pattern_pilot/event_log.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "pattern_pilot/error.hpp"

namespace pilot {

using nlohmann::json;

namespace {

constexpr std::string_view kParticipants = "participants";
constexpr std::string_view kTool = "tool";
constexpr std::string_view kData = "data";

ValueSet value_set(const json& j, const std::string& field, std::optional<std::size_t> line) {
  ValueSet out;
  if (j.is_null()) return out;
  if (j.is_string()) {
    out.insert(j.get<std::string>());
    return out;
  }
  if (!j.is_array()) throw Error(ErrorCode::Schema, field + " must be a string or an array of strings", line, field);
  for (const auto& v : j) {
    if (!v.is_string()) throw Error(ErrorCode::Schema, field + " must be a string or an array of strings", line, field);
    out.insert(v.get<std::string>());
  }
  return out;
}

InternalContext read_context(const json& object, std::optional<std::size_t> line) {
  InternalContext context;
  for (std::string_view dim : {kParticipants, kTool, kData}) {
    auto it = object.find(std::string(dim));
    if (it == object.end() || it->is_null()) continue;
    context.dimensions[std::string(dim)] = value_set(*it, std::string(dim), line);
  }
  if (auto it = object.find("attrs"); it != object.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(ErrorCode::Schema, "attrs must be an object", line, "attrs");
    for (const auto& [key, value] : it->items()) {
      if (key.empty()) throw Error(ErrorCode::Schema, "attribute names must be non-empty", line, "attrs");
      auto values = value_set(value, "attrs." + key, line);
      context.dimensions[key].insert(values.begin(), values.end());
    }
  }
  return context;
}

json value_json(const ValueSet& values, bool prefer_scalar) {
  if (prefer_scalar && values.size() == 1) return *values.begin();
  return json(values);
}

const std::string& required_string(const json& object, const char* field, std::optional<std::size_t> line) {
  auto it = object.find(field);
  if (it == object.end()) throw Error(ErrorCode::Schema, std::string("missing required field '") + field + "'", line, field);
  if (!it->is_string()) throw Error(ErrorCode::Schema, std::string("field '") + field + "' must be a string", line, field);
  return it->get_ref<const std::string&>();
}

std::vector<std::pair<std::size_t, std::string_view>> split_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    auto end = text.find('\n');
    auto line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

json parse_object_line(std::string_view line, std::size_t number) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::Parse, "malformed JSON", number);
  if (!j.is_object()) throw Error(ErrorCode::Schema, "each line must hold a JSON object", number);
  return j;
}

}  // namespace

const ValueSet* InternalContext::find(std::string_view dimension) const {
  auto it = dimensions.find(std::string(dimension));
  return it == dimensions.end() ? nullptr : &it->second;
}

std::string_view to_string(CaseStatus status) {
  return status == CaseStatus::Completed ? "completed" : "ongoing";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "success";
    case Outcome::Failure: return "failure";
    case Outcome::Unknown: break;
  }
  return "unknown";
}

std::vector<std::string> Trace::activities() const {
  std::vector<std::string> names;
  names.reserve(steps.size());
  for (const auto& s : steps) names.push_back(s.activity);
  return names;
}

std::string normalize_name(std::string_view name) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::Domain, "NFC normalizer unavailable");
  auto text = icu::UnicodeString::fromUTF8(icu::StringPiece(name.data(), static_cast<int32_t>(name.size())));
  icu::UnicodeString normalized = nfc->normalize(text, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::Schema, "name is not valid Unicode");
  normalized.trim();
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

void EventLog::append(Event event) {
  event.activity = normalize_name(event.activity);
  if (event.case_id.empty()) throw Error(ErrorCode::Schema, "case_id must be non-empty", {}, "case_id");
  if (event.activity.empty()) throw Error(ErrorCode::Schema, "activity must be non-empty", {}, "activity");
  if (event.external_context_id.empty())
    throw Error(ErrorCode::Schema, "external_context must be non-empty", {}, "external_context");

  auto it = cases_.find(event.case_id);
  if (it != cases_.end()) {
    CaseState& state = it->second;
    if (event.seq <= state.max_seq) {
      bool duplicate = std::any_of(state.event_indices.begin(), state.event_indices.end(),
                                   [&](std::size_t i) { return events_[i].seq == event.seq; });
      if (duplicate) {
        throw Error(ErrorCode::Duplicate, "duplicate event in case '" + event.case_id + "' (seq " +
                                              std::to_string(event.seq) + ")");
      }
      throw Error(ErrorCode::Ordering, "seq " + std::to_string(event.seq) + " in case '" + event.case_id +
                                           "' is lower than the case maximum " + std::to_string(state.max_seq));
    }
    if (state.closed) throw Error(ErrorCode::Ordering, "case '" + event.case_id + "' has already ended");
    if (event.external_context_id != state.external_context_id) {
      throw Error(ErrorCode::Ordering, "case '" + event.case_id + "' runs in context '" + state.external_context_id +
                                           "'; start a new case that continues it to switch to '" +
                                           event.external_context_id + "'");
    }
  } else {
    it = cases_.emplace(event.case_id, CaseState{}).first;
    it->second.external_context_id = event.external_context_id;
  }

  CaseState& state = it->second;
  state.max_seq = event.seq;
  state.closed = event.lifecycle == Lifecycle::CaseEnd;
  state.event_indices.push_back(events_.size());
  events_.push_back(std::move(event));
}

Trace EventLog::build_trace(const std::string& case_id, const CaseState& state) const {
  Trace trace;
  trace.case_id = case_id;
  trace.external_context_id = state.external_context_id;
  trace.status = state.closed ? CaseStatus::Completed : CaseStatus::Ongoing;
  trace.steps.reserve(state.event_indices.size());
  for (std::size_t i : state.event_indices) {
    const Event& e = events_[i];
    trace.steps.push_back(Step{e.activity, e.internal_context, e.seq, e.timestamp});
    if (!trace.continues && e.continues) trace.continues = e.continues;
  }
  return trace;
}

std::vector<Trace> EventLog::traces() const {
  std::vector<Trace> out;
  out.reserve(cases_.size());
  for (const auto& [id, state] : cases_) out.push_back(build_trace(id, state));
  return out;
}

std::optional<Trace> EventLog::trace(const std::string& case_id) const {
  auto it = cases_.find(case_id);
  if (it == cases_.end()) return std::nullopt;
  return build_trace(it->first, it->second);
}

ExternalContext EventLog::context(const std::string& id) const {
  auto it = contexts_.find(id);
  if (it != contexts_.end()) return it->second;
  return ExternalContext{id, {}};
}

InternalContext internal_context_from_json(const json& object) { return read_context(object, std::nullopt); }

void write_internal_context(const InternalContext& context, json& object) {
  json attrs = json::object();
  for (const auto& [dim, values] : context.dimensions) {
    if (dim == kParticipants || dim == kData) {
      object[dim] = value_json(values, false);
    } else if (dim == kTool) {
      object[dim] = value_json(values, true);
    } else {
      attrs[dim] = value_json(values, true);
    }
  }
  if (!attrs.empty()) object["attrs"] = std::move(attrs);
}

Step step_from_json(const json& object, std::optional<std::size_t> line) {
  if (!object.is_object()) throw Error(ErrorCode::Schema, "step must be a JSON object", line);
  Step step;
  step.activity = normalize_name(required_string(object, "activity", line));
  if (step.activity.empty()) throw Error(ErrorCode::Schema, "activity must be non-empty", line, "activity");
  step.context = read_context(object, line);
  if (auto it = object.find("seq"); it != object.end() && it->is_number_unsigned()) step.seq = it->get<std::uint64_t>();
  if (auto it = object.find("timestamp"); it != object.end() && it->is_string()) step.timestamp = it->get<std::string>();
  return step;
}

Event event_from_json(const json& object, std::optional<std::size_t> line) {
  if (!object.is_object()) throw Error(ErrorCode::Schema, "event must be a JSON object", line);
  Event e;
  e.case_id = required_string(object, "case_id", line);
  auto seq = object.find("seq");
  if (seq == object.end()) throw Error(ErrorCode::Schema, "missing required field 'seq'", line, "seq");
  if (!seq->is_number_integer() || (seq->is_number_integer() && !seq->is_number_unsigned() && seq->get<std::int64_t>() < 0))
    throw Error(ErrorCode::Schema, "field 'seq' must be a non-negative integer", line, "seq");
  e.seq = seq->get<std::uint64_t>();
  e.external_context_id = required_string(object, "external_context", line);
  Step step = step_from_json(object, line);
  e.activity = std::move(step.activity);
  e.internal_context = std::move(step.context);
  e.timestamp = std::move(step.timestamp);
  if (auto it = object.find("timestamp"); it != object.end() && !it->is_null() && !it->is_string())
    throw Error(ErrorCode::Schema, "timestamp must be a string", line, "timestamp");
  if (auto it = object.find("lifecycle"); it != object.end() && !it->is_null()) {
    if (*it == "case_end") {
      e.lifecycle = Lifecycle::CaseEnd;
    } else if (*it != "step") {
      throw Error(ErrorCode::Schema, "lifecycle must be \"step\" or \"case_end\"", line, "lifecycle");
    }
  }
  if (auto it = object.find("continues"); it != object.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::Schema, "continues must be a case id string", line, "continues");
    e.continues = it->get<std::string>();
  }
  return e;
}

json to_json(const Event& e) {
  json j = json::object();
  j["case_id"] = e.case_id;
  j["seq"] = e.seq;
  j["activity"] = e.activity;
  write_internal_context(e.internal_context, j);
  j["external_context"] = e.external_context_id;
  if (e.timestamp) j["timestamp"] = *e.timestamp;
  j["lifecycle"] = e.lifecycle == Lifecycle::CaseEnd ? "case_end" : "step";
  if (e.continues) j["continues"] = *e.continues;
  return j;
}

json to_json(const Trace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json step = json::object();
    step["seq"] = s.seq;
    step["activity"] = s.activity;
    write_internal_context(s.context, step);
    if (s.timestamp) step["timestamp"] = *s.timestamp;
    steps.push_back(std::move(step));
  }
  json j{{"case_id", t.case_id},
         {"external_context", t.external_context_id},
         {"status", to_string(t.status)},
         {"outcome", to_string(t.outcome)},
         {"steps", std::move(steps)}};
  if (t.continues) j["continues"] = *t.continues;
  return j;
}

json to_json(const ExternalContext& c) { return json{{"id", c.id}, {"attributes", c.attributes}}; }

EventLog parse_log(std::string_view jsonl) {
  struct Parsed {
    Event event;
    std::size_t line;
  };
  std::vector<Parsed> parsed;
  std::set<std::pair<std::string, std::uint64_t>> keys;
  for (auto [number, line] : split_lines(jsonl)) {
    Event e = event_from_json(parse_object_line(line, number), number);
    if (!keys.emplace(e.case_id, e.seq).second) {
      throw Error(ErrorCode::Duplicate,
                  "duplicate event in case '" + e.case_id + "' (seq " + std::to_string(e.seq) + ")", number, "seq");
    }
    parsed.push_back(Parsed{std::move(e), number});
  }

  // Keep the global interleaving of cases but order each case by seq: the
  // k-th slot taken by a case receives that case's k-th smallest seq.
  std::map<std::string, std::vector<std::size_t>> slots;
  for (std::size_t i = 0; i < parsed.size(); ++i) slots[parsed[i].event.case_id].push_back(i);
  std::vector<std::size_t> order(parsed.size());
  for (auto& [id, indices] : slots) {
    auto sorted = indices;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](std::size_t a, std::size_t b) { return parsed[a].event.seq < parsed[b].event.seq; });
    for (std::size_t k = 0; k < indices.size(); ++k) order[indices[k]] = sorted[k];
  }

  EventLog log;
  for (std::size_t i : order) {
    try {
      log.append(parsed[i].event);
    } catch (const Error& err) {
      std::string message = err.what();
      throw Error(err.code(), message, parsed[i].line, err.field());
    }
  }
  return log;
}

std::string serialize_log(const EventLog& log) {
  std::string out;
  for (const auto& e : log.events()) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

EventLog load_log(const std::string& path) { return parse_log(read_file(path)); }

std::vector<Step> parse_steps(std::string_view jsonl) {
  std::vector<Step> steps;
  for (auto [number, line] : split_lines(jsonl)) steps.push_back(step_from_json(parse_object_line(line, number), number));
  return steps;
}

ContextCatalog context_catalog_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, "context catalog must be an object keyed by context id");
  ContextCatalog catalog;
  for (const auto& [id, attrs] : j.items()) {
    if (!attrs.is_object()) throw Error(ErrorCode::Schema, "context '" + id + "' must map attribute names to strings", {}, id);
    ExternalContext ctx{id, {}};
    for (const auto& [key, value] : attrs.items()) {
      if (!value.is_string()) throw Error(ErrorCode::Schema, "context attribute '" + key + "' must be a string", {}, key);
      ctx.attributes[key] = value.get<std::string>();
    }
    catalog.emplace(id, std::move(ctx));
  }
  return catalog;
}

ContextCatalog parse_context_catalog(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::Parse, "context catalog is not valid JSON");
  return context_catalog_from_json(j);
}

json to_json(const ContextCatalog& catalog) {
  json j = json::object();
  for (const auto& [id, ctx] : catalog) j[id] = ctx.attributes;
  return j;
}

ContextCatalog load_context_catalog(const std::string& path) { return parse_context_catalog(read_file(path)); }

std::optional<std::int64_t> parse_utc_timestamp(std::string_view text) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0, consumed = 0;
  std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &year, &month, &day, &hour, &minute, &second, &consumed) != 6)
    return std::nullopt;
  std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
  }
  if (rest != "Z") return std::nullopt;
  using namespace std::chrono;
  year_month_day date{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                      std::chrono::day{static_cast<unsigned>(day)}};
  if (!date.ok() || hour > 23 || minute > 59 || second > 60) return std::nullopt;
  auto days = sys_days{date}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second;
}

Outcome evaluate_outcome(const Trace& trace, const SuccessPredicate& predicate) {
  if (trace.status != CaseStatus::Completed) return Outcome::Unknown;
  auto holds = [&] {
    if (predicate.terminal_activities) {
      if (trace.steps.empty()) return false;
      bool any = std::any_of(predicate.terminal_activities->begin(), predicate.terminal_activities->end(),
                             [&](const std::string& a) { return normalize_name(a) == trace.steps.back().activity; });
      if (!any) return false;
    }
    if (predicate.must_contain) {
      for (const auto& required : *predicate.must_contain) {
        auto name = normalize_name(required);
        bool found = std::any_of(trace.steps.begin(), trace.steps.end(),
                                 [&](const Step& s) { return s.activity == name; });
        if (!found) return false;
      }
    }
    if (predicate.max_length && trace.steps.size() > *predicate.max_length) return false;
    if (predicate.max_duration_s) {
      if (trace.steps.empty() || !trace.steps.front().timestamp || !trace.steps.back().timestamp) return false;
      auto first = parse_utc_timestamp(*trace.steps.front().timestamp);
      auto last = parse_utc_timestamp(*trace.steps.back().timestamp);
      if (!first || !last || *last - *first > *predicate.max_duration_s) return false;
    }
    return true;
  };
  return holds() ? Outcome::Success : Outcome::Failure;
}

}  // namespace pilot
