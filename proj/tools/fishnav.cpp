#include <iostream>
#include <string>
#include <vector>

#include "fishnav/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fishnav::dispatch(args, std::cout, std::cerr);
}
