#include <iostream>

#include "smlab/cli/experiments.hpp"

int main(int argc, char** argv) { return smlab::cli::run_cli(argc, argv, std::cout, std::cerr); }
