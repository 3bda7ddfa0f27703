#include <iostream>

#include "qclt/cli.hpp"

int main(int argc, char** argv) { return qclt::cli::run_cli(argc, argv, std::cout, std::cerr); }
