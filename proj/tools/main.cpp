#include <iostream>
#include <string>
#include <vector>

#include "cli_app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    branchmc_cli::Cli cli;
    return cli.run(std::move(args), std::cout, std::cerr);
}
