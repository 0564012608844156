#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pilot {

/// Exit codes: 0 success, 1 failure, 2 when `recommend` finds no items.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pilot
