#include "pbt/cli.hpp"

int main(int argc, char** argv) { return pbt::cli::run(argc, argv); }
