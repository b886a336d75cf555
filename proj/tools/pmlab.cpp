#include <iostream>
#include <string>
#include <vector>

#include "pmlab/cli.hpp"

int main(int argc, char** argv) {
  return pmlab::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
