#include "garden/cli.hpp"

int main(int argc, char** argv) { return garden::cli::run(argc, argv); }
