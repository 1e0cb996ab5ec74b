#include "circlefilt/cli.hpp"

int main(int argc, char** argv) { return circlefilt::cli::run(argc, argv); }
