#include "cli.hpp"

int main(int argc, char** argv) { return vshp::cli::run(argc, argv); }
