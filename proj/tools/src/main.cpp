#include <iostream>

#include "cutofflab/cli/commands.hpp"

int main(int argc, char** argv) { return cutofflab::cli::run(argc, argv, std::cout, std::cerr); }
