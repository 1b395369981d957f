#include <iostream>

#include "clustersim/cli.hpp"

int main(int argc, char** argv) { return clustersim::cli::main(argc, argv, std::cerr); }
