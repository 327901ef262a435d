#include "smfm/cli.hpp"

int main(int argc, char** argv) { return smfm::run_cli(argc, argv); }
