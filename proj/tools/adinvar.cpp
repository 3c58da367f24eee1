#include <iostream>
#include <string>
#include <vector>

#include "adinvar/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return adinvar::cli::run(args, std::cout, std::cerr);
}
