#include "coldchain/cli.hpp"

int main(int argc, char** argv) { return coldchain::cli::run(argc, argv); }
