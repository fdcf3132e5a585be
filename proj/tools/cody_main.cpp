#include <string>
#include <vector>

#include "cody/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cody::cli::run(std::move(args));
}
