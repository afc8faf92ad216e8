#include <iostream>
#include <string>
#include <vector>

#include "hym/cli.hpp"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hym::cli_dispatch(args, std::cout, std::cerr);
}
