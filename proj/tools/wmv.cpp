#include <iostream>

#include "wmv/cli.hpp"

int main(int argc, char** argv) { return wmv::cli::run(argc, argv, std::cout, std::cerr); }
