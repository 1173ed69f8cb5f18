#include <iostream>
#include <string>
#include <vector>

#include "fbcov/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fbcov::run_cli(args, std::cout, std::cerr);
}
