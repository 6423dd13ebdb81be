#include <iostream>

#include "vnw/cli.hpp"

int main(int argc, char** argv) { return vnw::cli::run(argc, argv, std::cout, std::cerr); }
