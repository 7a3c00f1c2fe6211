#include <iostream>

#include "beam/cli.hpp"

int main(int argc, char** argv) { return beam::dispatch(argc, argv, std::cout, std::cerr); }
