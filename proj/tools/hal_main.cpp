// File: hal_main.cpp
// Description: `hal` executable

#include <iostream>
#include <string>
#include <vector>

#include "hal/cli/app.hpp"

auto main(int argc, char** argv) -> int {
    return hal::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
