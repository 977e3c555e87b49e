#include <iostream>

#include "tcircle/cli.hpp"

int main(int argc, char** argv) { return tcircle::cli_main(argc, argv, std::cout, std::cerr); }
