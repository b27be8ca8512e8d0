#include "fenecongest/cli.hpp"

int main(int argc, char** argv) { return fenecongest::run_cli(argc, argv); }
