#include "ablab/runner.hpp"

int main(int argc, char** argv) { return ablab::runner::main_cli(argc, argv); }
