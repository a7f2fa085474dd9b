#include "scnoise/cli.hpp"

int main(int argc, char** argv) { return scnoise::run_cli(argc, argv); }
