#include <iostream>

#include "lbto/cli.hpp"

int main(int argc, char** argv) { return lbto::run_cli(argc, argv, std::cout, std::cerr); }
