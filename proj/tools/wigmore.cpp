#include <iostream>
#include <string>
#include <vector>

#include "wigmore/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wigmore::cli::run_cli(args, std::cout, std::cerr);
}
