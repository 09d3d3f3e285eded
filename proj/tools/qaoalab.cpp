#include "qaoalab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qaoalab::run_cli(argc, argv, std::cout, std::cerr); }
