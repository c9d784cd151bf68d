#include "bspde/cli.hpp"

int main(int argc, char** argv) {
    return bspde::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
