#include <string>
#include <vector>

#include "catsim/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return catsim::run_cli(args);
}
