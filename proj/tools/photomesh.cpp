#include "photomesh/cli.hpp"

int main(int argc, char **argv) { return photomesh::run_cli(argc, argv); }
