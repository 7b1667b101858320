#include <string>
#include <vector>

#include "rejfilt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rejfilt::run_cli(args);
}
