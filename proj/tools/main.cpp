#include "kreinlab/cli.hpp"

int main(int argc, char** argv) { return kreinlab::cli::run(argc, argv); }
