#include <iostream>

#include "cardie_cli/cli.hpp"

int main(int argc, char** argv) {
  return cardie::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
