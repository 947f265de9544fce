#include <iostream>

#include "coop2/cli.hpp"

int main(int argc, char** argv) { return coop2::run_cli(argc, argv, std::cout, std::cerr); }
