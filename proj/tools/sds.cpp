#include "sds_cli.hpp"

int main(int argc, char** argv) { return sds::cli::dispatch(argc, argv); }
