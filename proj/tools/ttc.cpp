#include <iostream>

#include "ttc/cli/cli.hpp"

int main(int argc, char** argv) { return ttc::cli::run(argc, argv, std::cout, std::cerr); }
