#include "gseo/cli/commands.hpp"

int main(int argc, char** argv) { return gseo::cli::run(argc, argv); }
