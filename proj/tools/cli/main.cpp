#include "app.hpp"

int main(int argc, char** argv) { return stmbus::cli::run_cli(argc, argv); }
