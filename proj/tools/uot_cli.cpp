#include <string>
#include <vector>

#include "uot/cli_io.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return uot::run_command(args);
}
