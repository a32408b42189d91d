#include <string>
#include <vector>

#include "som/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return som::cli::run_cli(args);
}
