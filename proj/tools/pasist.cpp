#include "pasist/cli.hpp"

int main(int argc, char** argv) { return pasist::cli::run(argc, argv); }
