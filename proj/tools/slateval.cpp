#include <iostream>
#include <string>
#include <vector>

#include "slateval/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return slateval::cli::run_cli(args, std::cout, std::cerr);
}
