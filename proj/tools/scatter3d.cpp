#include <iostream>
#include <string>
#include <vector>

#include "scatter3d/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scatter3d::dispatch(args, std::cout, std::cerr);
}
