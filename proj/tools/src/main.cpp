#include <iostream>

#include "aniso_tools/commands.hpp"

int main(int argc, char** argv) { return aniso::tools::run_cli(argc, argv, std::cout, std::cerr); }
