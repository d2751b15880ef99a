#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return pmt::cli::dispatch(argc, argv, std::cout, std::cerr); }
