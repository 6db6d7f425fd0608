#include "kgsa/cli/commands.hpp"

int main(int argc, char** argv) { return kgsa::cli::run_cli(argc, argv); }
