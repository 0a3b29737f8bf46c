#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  collider::cli::Runner runner(std::cout, std::cerr);
  return runner.run(argc, argv);
}
