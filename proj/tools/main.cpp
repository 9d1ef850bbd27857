#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return coarse::cli::cli_dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
