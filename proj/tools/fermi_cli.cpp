#include <iostream>

#include "fermi/cli.hpp"

int main(int argc, char** argv) { return fermi::run_cli(argc, argv, std::cout, std::cerr); }
