#include <iostream>

#include "shared_interest/cli.hpp"

int main(int argc, char** argv) { return si::run_cli(argc, argv, std::cout, std::cerr); }
