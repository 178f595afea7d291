#include "cli.hpp"

int main(int argc, char** argv) { return magest::run_cli(argc, argv); }
