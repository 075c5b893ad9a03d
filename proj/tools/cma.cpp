#include <iostream>

#include "cma/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cma::cli::dispatch(args, std::cout, std::cerr);
}
