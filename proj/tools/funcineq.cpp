#include "funcineq/cli.hpp"

int main(int argc, char** argv) { return funcineq::cli::run(argc, argv); }
