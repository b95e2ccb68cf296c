#include <iostream>

#include "dualkge/cli.hpp"

int main(int argc, char** argv) { return dualkge::cli::run(argc, argv, std::cout, std::cerr); }
