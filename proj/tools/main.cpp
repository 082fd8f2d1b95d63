#include <iostream>

#include "octbd_cli.hpp"

int main(int argc, char** argv) { return octbd::cli::run(argc, argv, std::cout, std::cerr); }
