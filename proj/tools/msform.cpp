#include <iostream>

#include "msform/cli.hpp"

int main(int argc, char** argv) {
  return msform::cli::main_entry(argc, argv, std::cout, std::cerr);
}
