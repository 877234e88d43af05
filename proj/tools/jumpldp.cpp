#include <iostream>

#include "jumpldp/cli.hpp"

int main(int argc, char** argv) { return jumpldp::run_cli(argc, argv, std::cout, std::cerr); }
