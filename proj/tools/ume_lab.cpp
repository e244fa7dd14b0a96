#include "cli/cli.hpp"

int main(int argc, char** argv) { return ume::cli::main_entry(argc, argv); }
