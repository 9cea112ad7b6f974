#include <string>
#include <vector>

#include "rsbench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return rsbench::cli::dispatch(args);
}
