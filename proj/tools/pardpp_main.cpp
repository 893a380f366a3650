#include <iostream>
#include <string>
#include <vector>

#include "pardpp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pardpp::run_cli(args, std::cout, std::cerr);
}
