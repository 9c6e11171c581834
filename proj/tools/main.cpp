#include <iostream>

#include "adasel/cli.hpp"

int main(int argc, char** argv) { return adasel::cli::run(argc, argv, std::cout, std::cerr); }
