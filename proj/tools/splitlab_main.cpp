#include <string>
#include <vector>

#include "splitlab/cli_report.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return splitlab::run_subcommand(args);
}
