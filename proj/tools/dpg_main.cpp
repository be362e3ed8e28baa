#include <iostream>

#include "dpg/cli.hpp"

int main(int argc, char** argv) { return dpg::cli::run(argc, argv, std::cout, std::cerr); }
