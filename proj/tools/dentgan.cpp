#include "dentgan/cli.hpp"

int main(int argc, char** argv) { return dentgan::cli::run(argc, argv); }
