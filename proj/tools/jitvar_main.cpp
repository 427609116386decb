#include <iostream>
#include <string>
#include <vector>

#include "jitvar/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return jitvar::cli_dispatch(args, std::cout, std::cerr);
}
