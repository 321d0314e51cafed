#include <iostream>

#include "nonclassical/cli.hpp"

int main(int argc, char** argv) {
  return nonclassical::cli::main_entry(argc, argv, std::cout, std::cerr);
}
