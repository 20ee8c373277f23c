#include "medtweet/cli.hpp"

int main(int argc, char** argv) { return medtweet::cli::run(argc, argv); }
