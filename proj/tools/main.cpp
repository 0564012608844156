#include <iostream>
#include <string>
#include <vector>

#include "pattern_pilot/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pilot::run_cli(args, std::cout, std::cerr);
}
