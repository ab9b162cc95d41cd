#include "pwbf/cli.hpp"

int main(int argc, char **argv) { return pwbf::cli::run(argc, argv); }
