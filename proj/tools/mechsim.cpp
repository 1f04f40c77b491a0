#include <iostream>

#include "mechsim/cli/main.hpp"

int main(int argc, char** argv) { return mechsim::cli::run_main(argc, argv, std::cout, std::cerr); }
