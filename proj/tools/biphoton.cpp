#include "biphoton/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return biphoton::run_subcommand(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
