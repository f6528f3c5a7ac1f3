#include "skewfatou/cli/cli.hpp"

int main(int argc, char** argv) { return skewfatou::cli::dispatch(argc, argv); }
