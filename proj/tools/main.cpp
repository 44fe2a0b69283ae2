#include "coexsim/cli.hpp"

int main(int argc, char** argv) { return coexsim::cli::main_entry(argc, argv); }
