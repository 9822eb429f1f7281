#include "webcent/cli.hpp"

int main(int argc, char** argv) { return webcent::cli::main(argc, argv); }
