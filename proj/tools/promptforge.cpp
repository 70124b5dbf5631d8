#include <iostream>

#include "promptforge/cli.hpp"

int main(int argc, char** argv) { return promptforge::run_cli(argc, argv, std::cout, std::cerr); }
