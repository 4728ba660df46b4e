#include "gated_spectra/experiments/cli.hpp"

int main(int argc, char** argv) { return gspec::run_cli(argc, argv); }
