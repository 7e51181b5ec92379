#include <iostream>

#include "ops/opsd/cli.hpp"

int main(int argc, char** argv) { return ops::opsd::run_cli(argc, argv, std::cout, std::cerr); }
