#include "gpva/cli.hpp"

int main(int argc, char **argv) { return gpva::cli::run(argc, argv); }
