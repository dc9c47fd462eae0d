#include <iostream>

#include "unconfined/cli.hpp"

int main(int argc, char** argv) { return unconfined::run_cli(argc, argv, std::cout, std::cerr); }
