#include <iostream>
#include <string>
#include <vector>

#include "outcome_forge/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return outcome_forge::run_cli(args, std::cout, std::cerr);
}
