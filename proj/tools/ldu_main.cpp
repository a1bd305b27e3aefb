#include <iostream>
#include <string>
#include <vector>

#include "ldu/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ldu::run_command(args, std::cout, std::cerr);
}
