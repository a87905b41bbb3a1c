#include "dtdist/cli.hpp"

int main(int argc, char** argv) { return dtdist::cli::run_cli(argc, argv); }
