#include "cli_app.hpp"

int main(int argc, char** argv) { return dikf::cli::run(argc, argv); }
