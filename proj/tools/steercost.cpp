#include "steercost/cli.hpp"

int main(int argc, char** argv) { return steercost::cli::dispatch(argc, argv); }
