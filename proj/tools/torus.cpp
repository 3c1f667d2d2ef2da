#include "torus/cli.hpp"

int main(int argc, char** argv) { return torus::cli::dispatch(argc, argv); }
