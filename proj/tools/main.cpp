#include <iostream>

#include "wnslab/cli.hpp"

int main(int argc, char** argv) {
  return wnslab::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
