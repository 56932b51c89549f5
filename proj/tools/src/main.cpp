#include <iostream>

#include "tlamm_cli/cli.hpp"

int main(int argc, char** argv)
{
    return tlamm::cli::run(argc, argv, std::cout, std::cerr);
}
