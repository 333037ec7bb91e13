#include <iostream>

#include "certcal/cli.hpp"

int main(int argc, char** argv) { return certcal::cli::run(argc, argv, std::cout, std::cerr); }
