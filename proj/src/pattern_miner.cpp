#include "pattern_pilot/pattern_miner.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "pattern_pilot/error.hpp"

namespace pilot {

using nlohmann::json;

namespace {

using Occurrence = std::pair<std::size_t, std::size_t>;  // (trace index, start)

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::size_t distinct_traces(std::span<const Occurrence> occs) {
  std::size_t n = 0;
  std::size_t last = SIZE_MAX;
  for (const auto& [t, start] : occs) {
    if (t != last) ++n;
    last = t;
  }
  return n;
}

/// One context's traces as symbol sequences.
struct Corpus {
  std::vector<std::size_t> trace_index;  // into the caller's span
  std::vector<std::vector<int>> symbols;
  std::vector<std::string> names;
};

Corpus intern(std::span<const Trace> traces, const std::vector<std::size_t>& members) {
  Corpus corpus;
  std::unordered_map<std::string, int> ids;
  for (std::size_t idx : members) {
    std::vector<int> seq;
    seq.reserve(traces[idx].steps.size());
    for (const auto& step : traces[idx].steps) {
      auto [it, inserted] = ids.emplace(step.activity, static_cast<int>(corpus.names.size()));
      if (inserted) corpus.names.push_back(step.activity);
      seq.push_back(it->second);
    }
    corpus.trace_index.push_back(idx);
    corpus.symbols.push_back(std::move(seq));
  }
  return corpus;
}

ActivityPattern make_pattern(std::span<const Trace> traces, const std::string& context,
                             std::vector<std::string> activities, std::span<const Occurrence> global_occs,
                             const Preferences& prefs) {
  // first occurrence per supporting trace
  std::vector<Occurrence> firsts;
  for (const auto& occ : global_occs) {
    if (firsts.empty() || firsts.back().first != occ.first) firsts.push_back(occ);
  }
  ActivityPattern p;
  p.external_context_id = context;
  p.id = pattern_id(context, activities);
  p.templates = aggregate_templates(traces, firsts, activities.size());
  p.support = firsts.size();
  for (const auto& [t, start] : firsts) {
    const Trace& trace = traces[t];
    p.source_case_ids.insert(trace.case_id);
    if (evaluate_outcome(trace, prefs.success) == Outcome::Success) ++p.successful_support;
    std::set<std::string> people;
    for (const auto& step : trace.steps) {
      if (const auto* v = step.context.find("participants")) people.insert(v->begin(), v->end());
    }
    for (const auto& person : people) ++p.participant_support[person];
  }
  return p;
}

void mine_context(std::span<const Trace> traces, const std::string& context, const std::vector<std::size_t>& members,
                  const Preferences& prefs, std::vector<ActivityPattern>& out) {
  const Corpus corpus = intern(traces, members);
  const std::size_t alphabet = corpus.names.size();

  struct Node {
    std::vector<int> seq;
    std::vector<Occurrence> occs;  // local trace index, sorted by (trace, start)
  };
  std::vector<Node> stack;
  {
    std::vector<std::vector<Occurrence>> by_symbol(alphabet);
    for (std::size_t t = 0; t < corpus.symbols.size(); ++t) {
      for (std::size_t i = 0; i < corpus.symbols[t].size(); ++i) by_symbol[corpus.symbols[t][i]].emplace_back(t, i);
    }
    for (std::size_t s = alphabet; s-- > 0;) {
      if (distinct_traces(by_symbol[s]) >= prefs.min_support) stack.push_back(Node{{static_cast<int>(s)}, std::move(by_symbol[s])});
    }
  }

  std::vector<std::vector<Occurrence>> right(alphabet);
  std::vector<std::size_t> left_support(alphabet);
  std::vector<std::size_t> left_last(alphabet);
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    const std::size_t len = node.seq.size();
    const std::size_t support = distinct_traces(node.occs);

    for (auto& r : right) r.clear();
    std::fill(left_support.begin(), left_support.end(), 0);
    std::fill(left_last.begin(), left_last.end(), SIZE_MAX);
    for (const auto& [t, start] : node.occs) {
      const auto& seq = corpus.symbols[t];
      if (start + len < seq.size()) right[seq[start + len]].emplace_back(t, start);
      if (start > 0) {
        int s = seq[start - 1];
        if (left_last[s] != t) {
          left_last[s] = t;
          ++left_support[s];
        }
      }
    }

    std::size_t best_extension = 0;
    for (std::size_t s = 0; s < alphabet; ++s) best_extension = std::max(best_extension, left_support[s]);
    for (std::size_t s = alphabet; s-- > 0;) {
      std::size_t ext_support = distinct_traces(right[s]);
      best_extension = std::max(best_extension, ext_support);
      if (ext_support >= prefs.min_support) {
        auto seq = node.seq;
        seq.push_back(static_cast<int>(s));
        stack.push_back(Node{std::move(seq), std::move(right[s])});
        right[s] = {};
      }
    }

    if (best_extension < support && len >= prefs.min_length) {
      std::vector<std::string> names;
      for (int s : node.seq) names.push_back(corpus.names[s]);
      std::vector<Occurrence> global;
      global.reserve(node.occs.size());
      for (const auto& [t, start] : node.occs) global.emplace_back(corpus.trace_index[t], start);
      out.push_back(make_pattern(traces, context, std::move(names), global, prefs));
    }
  }
}

json profile_json(const std::map<std::string, ValueCounts>& profile) {
  json j = json::object();
  for (const auto& [dim, counts] : profile) {
    json arr = json::array();
    for (const auto& [value, count] : counts) arr.push_back(json::array({value, count}));
    j[dim] = std::move(arr);
  }
  return j;
}

template <typename T>
T field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorCode::Schema, std::string("repository: missing field '") + name + "'", {}, name);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Schema, std::string("repository: field '") + name + "' has the wrong type", {}, name);
  }
}

}  // namespace

ValueSet ActivityTemplate::modal_values(const std::string& dimension) const {
  ValueSet out;
  auto it = profile.find(dimension);
  if (it == profile.end() || it->second.empty()) return out;
  const std::size_t top = it->second.front().second;
  for (const auto& [value, count] : it->second) {
    if (count == top) out.insert(value);
  }
  return out;
}

std::vector<std::string> ActivityPattern::activities() const {
  std::vector<std::string> names;
  for (const auto& t : templates) names.push_back(t.activity);
  return names;
}

std::string pattern_id(const std::string& external_context_id, std::span<const std::string> activities) {
  std::uint64_t h = fnv1a(external_context_id);
  for (const auto& a : activities) {
    h = fnv1a("\x1f", h);
    h = fnv1a(a, h);
  }
  return hex16(h);
}

std::vector<ActivityTemplate> aggregate_templates(std::span<const Trace> traces, std::span<const Occurrence> occurrences,
                                                  std::size_t length) {
  std::vector<std::map<std::string, std::map<std::string, std::size_t>>> counts(length);
  std::vector<ActivityTemplate> templates(length);
  for (const auto& [t, start] : occurrences) {
    for (std::size_t j = 0; j < length; ++j) {
      const Step& step = traces[t].steps.at(start + j);
      templates[j].activity = step.activity;
      for (const auto& [dim, values] : step.context.dimensions) {
        for (const auto& v : values) ++counts[j][dim][v];
      }
    }
  }
  for (std::size_t j = 0; j < length; ++j) {
    for (const auto& [dim, values] : counts[j]) {
      ValueCounts vc(values.begin(), values.end());
      std::sort(vc.begin(), vc.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
      });
      templates[j].profile.emplace(dim, std::move(vc));
    }
  }
  return templates;
}

void sort_patterns(std::vector<ActivityPattern>& patterns) {
  std::sort(patterns.begin(), patterns.end(), [](const ActivityPattern& a, const ActivityPattern& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.templates.size() != b.templates.size()) return a.templates.size() > b.templates.size();
    if (a.id != b.id) return a.id < b.id;
    return a.external_context_id < b.external_context_id;
  });
}

std::vector<ActivityPattern> mine_patterns(std::span<const Trace> traces, const Preferences& prefs) {
  validate(prefs);
  std::map<std::string, std::vector<std::size_t>> by_context;
  for (std::size_t i = 0; i < traces.size(); ++i) by_context[traces[i].external_context_id].push_back(i);

  std::vector<ActivityPattern> out;
  for (const auto& [context, members] : by_context) mine_context(traces, context, members, prefs, out);
  sort_patterns(out);
  return out;
}

const ActivityPattern* PatternRepository::find(const std::string& id) const {
  for (const auto& p : patterns) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::map<std::string, std::size_t> PatternRepository::counts_by_context() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& p : patterns) ++counts[p.external_context_id];
  return counts;
}

PatternRepository PatternRepository::slice(const std::string& context_id) const {
  PatternRepository out = *this;
  out.patterns.clear();
  for (const auto& p : patterns) {
    if (p.external_context_id == context_id) out.patterns.push_back(p);
  }
  out.contexts.clear();
  if (auto it = contexts.find(context_id); it != contexts.end()) out.contexts.insert(*it);
  return out;
}

std::string log_version(const EventLog& log) { return hex16(fnv1a(serialize_log(log))); }

PatternRepository build_repository(const EventLog& log, const Preferences& prefs) {
  PatternRepository repo;
  repo.preferences = prefs;
  repo.log_version = log_version(log);
  repo.event_count = log.size();
  for (const auto& e : log.events()) {
    // ISO-8601 UTC strings of one format order lexicographically
    if (e.timestamp && *e.timestamp > repo.mined_at) repo.mined_at = *e.timestamp;
  }
  repo.contexts = log.contexts();
  auto traces = log.traces();
  repo.patterns = mine_patterns(traces, prefs);
  return repo;
}

json to_json(const ActivityTemplate& t) { return json{{"activity", t.activity}, {"profile", profile_json(t.profile)}}; }

json to_json(const ActivityPattern& p) {
  json templates = json::array();
  for (const auto& t : p.templates) templates.push_back(to_json(t));
  return json{{"id", p.id},
              {"context", p.external_context_id},
              {"support", p.support},
              {"successful_support", p.successful_support},
              {"closed", p.closed},
              {"templates", std::move(templates)},
              {"sources", p.source_case_ids},
              {"participant_support", p.participant_support}};
}

json to_json(const PatternRepository& repo) {
  json patterns = json::array();
  for (const auto& p : repo.patterns) patterns.push_back(to_json(p));
  return json{{"version", PatternRepository::kVersion},
              {"preferences", to_json(repo.preferences)},
              {"snapshot", {{"log_version", repo.log_version}, {"events", repo.event_count}, {"mined_at", repo.mined_at}}},
              {"contexts", to_json(repo.contexts)},
              {"patterns", std::move(patterns)}};
}

PatternRepository repository_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, "repository must be a JSON object");
  auto version = j.find("version");
  if (version == j.end()) throw Error(ErrorCode::Schema, "repository: missing field 'version'", {}, "version");
  if (!version->is_number_integer() || version->get<int>() != PatternRepository::kVersion) {
    throw Error(ErrorCode::Version, "unsupported repository version " + version->dump() + " (expected " +
                                        std::to_string(PatternRepository::kVersion) + ")");
  }
  PatternRepository repo;
  if (auto it = j.find("preferences"); it != j.end()) repo.preferences = preferences_from_json(*it);
  if (auto it = j.find("snapshot"); it != j.end()) {
    repo.log_version = field<std::string>(*it, "log_version");
    repo.event_count = field<std::size_t>(*it, "events");
    repo.mined_at = field<std::string>(*it, "mined_at");
  }
  if (auto it = j.find("contexts"); it != j.end()) repo.contexts = context_catalog_from_json(*it);
  for (const auto& pj : field<json>(j, "patterns")) {
    ActivityPattern p;
    p.id = field<std::string>(pj, "id");
    p.external_context_id = field<std::string>(pj, "context");
    p.support = field<std::size_t>(pj, "support");
    p.successful_support = field<std::size_t>(pj, "successful_support");
    p.closed = pj.value("closed", true);
    p.source_case_ids = field<std::set<std::string>>(pj, "sources");
    if (pj.contains("participant_support"))
      p.participant_support = field<std::map<std::string, std::size_t>>(pj, "participant_support");
    for (const auto& tj : field<json>(pj, "templates")) {
      ActivityTemplate t;
      t.activity = field<std::string>(tj, "activity");
      const json profile = field<json>(tj, "profile");
      for (const auto& [dim, counts] : profile.items()) {
        ValueCounts vc;
        for (const auto& pair : counts) {
          if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_number_unsigned())
            throw Error(ErrorCode::Schema, "repository: profile entries must be [value, count]", {}, dim);
          vc.emplace_back(pair[0].get<std::string>(), pair[1].get<std::size_t>());
        }
        t.profile.emplace(dim, std::move(vc));
      }
      p.templates.push_back(std::move(t));
    }
    if (p.templates.empty()) throw Error(ErrorCode::Schema, "repository: pattern " + p.id + " has no templates");
    if (p.successful_support > p.support)
      throw Error(ErrorCode::Schema, "repository: pattern " + p.id + " has successful_support > support");
    repo.patterns.push_back(std::move(p));
  }
  return repo;
}

std::string serialize_repository(const PatternRepository& repo) { return to_json(repo).dump(2) + "\n"; }

void save_repository(const PatternRepository& repo, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp);
    out << serialize_repository(repo);
    if (!out.flush()) throw Error(ErrorCode::Io, "cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace " + path + ": " + ec.message());
}

PatternRepository load_repository(const std::string& path) {
  const std::string text = read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::Parse, path + " is not valid JSON");
  return repository_from_json(j);
}

}  // namespace pilot
