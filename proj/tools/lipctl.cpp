#include <iostream>

#include "lipctl/cli.hpp"

int main(int argc, char** argv) { return lipctl::cli::run(argc, argv, std::cout, std::cerr); }
