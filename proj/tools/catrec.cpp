#include <iostream>

#include "catrec/cli.hpp"

int main(int argc, char** argv) { return catrec::cli::run_cli(argc, argv, std::cout, std::cerr); }
