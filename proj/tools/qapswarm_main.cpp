#include <iostream>

#include "qapswarm/cli.hpp"

int main(int argc, char** argv) { return qapswarm::cli::main(argc, argv, std::cout, std::cerr); }
