#include <iostream>

#include "pselinv/cli.hpp"

int main(int argc, char** argv)
{
    return pselinv::cli::run(argc, argv, std::cout, std::cerr);
}
