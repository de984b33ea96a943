#include <iostream>
#include <string>
#include <vector>

#include "chargechain_cli/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return chargechain::cli::RunCli(args, std::cout, std::cerr);
}
