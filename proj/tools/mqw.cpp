#include "mqw/cli.hpp"

int main(int argc, char** argv) { return mqw::cli::run_cli(argc, argv); }
