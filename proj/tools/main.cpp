#include "heraldmc/cli.hpp"

int main(int argc, char** argv) { return heraldmc::cli::run_main(argc, argv); }
