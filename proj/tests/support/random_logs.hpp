#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pattern_pilot/event_log.hpp"

namespace pilot::testing {

struct RandomLogShape {
  std::size_t max_traces = 8;
  std::size_t max_length = 10;
  std::size_t alphabet = 6;
  std::size_t contexts = 2;
};

/// Random traces over activities "A".."F" with small random internal
/// contexts; some completed, some ongoing.
std::vector<Trace> random_traces(std::mt19937_64& rng, const RandomLogShape& shape = {});

/// The same traces as a log of events.
EventLog to_log(const std::vector<Trace>& traces);

}  // namespace pilot::testing
