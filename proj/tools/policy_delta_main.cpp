#include <iostream>
#include <string>
#include <vector>

#include "policy_delta/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return policy_delta::RunCli(args, std::cout, std::cerr);
}
