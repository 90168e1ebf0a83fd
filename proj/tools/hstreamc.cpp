#include <iostream>

#include "hstream/cli/cli.hpp"

int main(int argc, char** argv) { return hstream::cli::run_main(argc, argv, std::cout, std::cerr); }
