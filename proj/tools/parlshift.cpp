#include "parlshift/cli.hpp"

int main(int argc, char** argv) { return parlshift::cli::run(argc, argv); }
