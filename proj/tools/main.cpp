#include "cli.hpp"

int main(int argc, char** argv) {
    return poison_scan::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
