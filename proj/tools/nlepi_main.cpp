#include <iostream>

#include "nlepi/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return nlepi::run_command(args, std::cout, std::cerr);
}
