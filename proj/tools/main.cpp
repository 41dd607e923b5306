#include <iostream>

#include "pdd/cli.hpp"

int main(int argc, char** argv) { return pdd::cli::run(argc, argv, std::cout, std::cerr); }
