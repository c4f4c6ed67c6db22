#include <iostream>

#include "linsys/cli/commands.hpp"

int main(int argc, char** argv) { return linsys::cli::run_cli(argc, argv, std::cout, std::cerr); }
