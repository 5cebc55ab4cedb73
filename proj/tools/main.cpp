#include "boxopt/bench.hpp"

int main(int argc, char** argv) { return boxopt::cli_main(argc, argv); }
