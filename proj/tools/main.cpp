#include <iostream>

#include "plmcurate/cli.hpp"

int main(int argc, char** argv) { return plmc::run_cli(argc, argv, std::cout, std::cerr); }
