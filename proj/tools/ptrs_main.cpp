#include <iostream>
#include <string>
#include <vector>

#include "ptrs/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ptrs::run(args, std::cout, std::cerr);
}
