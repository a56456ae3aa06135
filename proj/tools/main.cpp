#include "alignrecon/cli.hpp"

int main(int argc, char** argv) { return alignrecon::run_cli(argc, argv); }
