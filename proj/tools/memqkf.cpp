#include "memqkf/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return memqkf::cli::run(argc, argv, std::cout, std::cerr);
}
