#include "dps/cli.hpp"

int main(int argc, char** argv) { return dps::cli::run_cli(argc, argv); }
