#include <iostream>

#include "heavytail/cli.hpp"

int main(int argc, char** argv) { return heavytail::run_cli(argc, argv, std::cout, std::cerr); }
