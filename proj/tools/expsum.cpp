#include "expsum/cli.hpp"

int main(int argc, char** argv) { return expsum::cli::run(argc, argv); }
