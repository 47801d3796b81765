#include <iostream>

#include "opflow/cli.hpp"

int main(int argc, char** argv) { return opflow::run_cli(argc, argv, std::cout, std::cerr); }
