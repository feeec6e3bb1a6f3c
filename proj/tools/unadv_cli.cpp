#include "unadv/cli.hpp"

int main(int argc, char** argv) {
    return unadv::cli::cli_main({argv + 1, argv + argc});
}
