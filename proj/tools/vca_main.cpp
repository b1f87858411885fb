#include "vca/cli.hpp"

int main(int argc, char** argv) { return vca::cli_dispatch(argc, argv); }
