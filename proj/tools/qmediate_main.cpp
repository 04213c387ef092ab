#include "qmed/cli.hpp"

int main(int argc, char** argv) { return qmed::run_cli(argc, argv); }
