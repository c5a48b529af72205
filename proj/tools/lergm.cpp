#include <iostream>

#include "lergm/cli.hpp"

int main(int argc, char** argv) { return lergm::cli::run(argc, argv, std::cout, std::cerr); }
