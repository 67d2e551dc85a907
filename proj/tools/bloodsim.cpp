#include <bloodsim/cli.hpp>

int main(int argc, char** argv) { return bloodsim::cli::run_cli(argc, argv); }
