#include <iostream>

#include "specinfer/cli/commands.hpp"

int main(int argc, char** argv) { return specinfer::cli::run(argc, argv, std::cout, std::cerr); }
