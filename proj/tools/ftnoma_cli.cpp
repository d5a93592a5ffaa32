#include <iostream>

#include "ftnoma/cli_runner.hpp"

int main(int argc, char** argv) {
    return ftnoma::cli_main(argc, argv, std::cout, std::cerr);
}
