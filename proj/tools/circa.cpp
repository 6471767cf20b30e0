#include <iostream>

#include "circa/cli.hpp"

int main(int argc, char** argv) { return circa::run_cli(argc, argv, std::cout, std::cerr); }
