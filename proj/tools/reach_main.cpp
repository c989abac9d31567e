#include <iostream>
#include <string>
#include <vector>

#include "reach/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return reach::run_cli(args, std::cout, std::cerr);
}
