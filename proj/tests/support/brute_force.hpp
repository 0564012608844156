#pragma once

// Exhaustive-enumeration oracle for the pattern miner.

#include <span>
#include <vector>

#include "pattern_pilot/event_log.hpp"
#include "pattern_pilot/pattern_miner.hpp"
#include "pattern_pilot/preferences.hpp"

namespace pilot::oracle {

inline constexpr std::size_t kMaxEvents = 10'000;

/// Same contract as mine_patterns, computed by enumerating every contiguous
/// subsequence of every trace. Throws Error(Domain) above kMaxEvents events.
std::vector<ActivityPattern> brute_force_patterns(std::span<const Trace> traces, const Preferences& prefs);

/// Number of traces (of `context`) containing `activities` contiguously.
std::size_t recount_support(std::span<const Trace> traces, const std::string& context,
                            std::span<const std::string> activities);

}  // namespace pilot::oracle
