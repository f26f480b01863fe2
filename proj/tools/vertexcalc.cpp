#include <iostream>

#include "vertexcalc/cli.hpp"

int main(int argc, char** argv) { return vertexcalc::cli::run(argc, argv, std::cout, std::cerr); }
