#include <iostream>
#include <string>
#include <vector>

#include "limper/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return limper::run_cli(args, std::cout, std::cerr);
}
