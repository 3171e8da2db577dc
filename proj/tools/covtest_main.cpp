#include <iostream>
#include <string>
#include <vector>

#include "covtest/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return covtest::cli::run(args, std::cout, std::cerr);
}
