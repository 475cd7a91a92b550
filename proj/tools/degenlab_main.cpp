#include "degenlab/harness.hpp"

int main(int argc, char** argv) { return degenlab::run_cli(argc, argv); }
