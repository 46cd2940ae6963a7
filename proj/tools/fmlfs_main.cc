#include <iostream>
#include <string>
#include <vector>

#include "fmlfs/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fmlfs::RunCli(args, std::cout, std::cerr);
}
