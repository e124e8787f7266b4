#include "movingbox/cli_io.hpp"

int main(int argc, char** argv) { return movingbox::run_cli(argc, argv); }
