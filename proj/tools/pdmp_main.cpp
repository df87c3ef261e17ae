#include "pdmp/cli/commands.hpp"

int main(int argc, char** argv) { return pdmp::cli::main_entry(argc, argv); }
