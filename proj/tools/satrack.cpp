#include <iostream>

#include "satrack/cli.hpp"

int main(int argc, char** argv)
{
    return satrack::cli_main(argc, argv, std::cout, std::cerr);
}
