#include <iostream>

#include "nhxy/cli/run.hpp"

int main(int argc, char** argv) { return nhxy::cli::run_cli(argc, argv, std::cout, std::cerr); }
