#include "cli.hpp"

int main(int argc, char** argv) { return gazeconf::cli::run(argc, argv); }
