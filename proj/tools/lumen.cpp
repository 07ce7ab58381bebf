#include <iostream>
#include <string>
#include <vector>

#include "lumen/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return lumen::cli::run(args, std::cout, std::cerr);
}
