#include <iostream>

#include "hasprof/cli.hpp"

int main(int argc, char** argv) { return hasprof::run_cli(argc, argv, std::cout, std::cerr); }
