#include "precml/bench/cli.hpp"

int main(int argc, char** argv) { return precml::cli_main(argc, argv); }
