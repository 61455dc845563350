#include "hopper/cli.hpp"

int main(int argc, char** argv) { return hopper::cli::main(argc, argv); }
