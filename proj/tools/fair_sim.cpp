#include <iostream>

#include "fair/cli.hpp"

int main(int argc, char** argv) { return fair::cli::run(argc, argv, std::cout, std::cerr); }
