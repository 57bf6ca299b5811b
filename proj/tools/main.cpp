#include "honeytrap/cli.hpp"

#include <exception>
#include <iostream>

int main(int argc, char** argv)
{
    try {
        honeytrap::configure_logging();
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return honeytrap::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
