#include <iostream>
#include <string>
#include <vector>

#include "stosqp/bench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stosqp::bench::cli_main(args, std::cout, std::cerr);
}
