#include <iostream>

#include "eegdiff/train/cli.hpp"

int main(int argc, char** argv) { return eegdiff::train::run_cli(argc, argv, std::cout, std::cerr); }
