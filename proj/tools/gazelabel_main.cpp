#include "gazelabel/cli.hpp"

int main(int argc, char** argv) { return gazelabel::run_cli(argc, argv); }
