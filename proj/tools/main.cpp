#include "mvpal/cli.hpp"

int main(int argc, char** argv) { return mvpal::run_cli(argc, argv); }
