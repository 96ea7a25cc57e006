#include "bck/cli.hpp"

int main(int argc, char** argv) { return bck::cli::run(argc, argv); }
