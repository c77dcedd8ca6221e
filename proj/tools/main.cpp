#include <iostream>

#include "graphmask/cli/commands.hpp"

int main(int argc, char** argv) { return graphmask::cli::run(argc, argv, std::cout, std::cerr); }
