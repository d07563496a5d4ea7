#include "floqmem/commands.hpp"

int main(int argc, char** argv) { return floqmem::run_cli(argc, argv); }
