#include <iostream>

#include "fnmt/cli.hpp"

int main(int argc, char** argv) {
  return fnmt::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
