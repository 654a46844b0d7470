#include "savcd/cli.hpp"

int main(int argc, char** argv) { return savcd::cli_main(argc, argv); }
