#include <iostream>

#include "mpmi/cli.hpp"

int main(int argc, char** argv) { return mpmi::cli::run(argc, argv, std::cout, std::cerr); }
