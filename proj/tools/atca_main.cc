#include <iostream>
#include <string>
#include <vector>

#include "atca/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return atca::RunCommand(args, std::cout, std::cerr);
}
