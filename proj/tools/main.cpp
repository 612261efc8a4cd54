#include "dage/cli.hpp"

int main(int argc, char** argv) { return dage::run_cli(argc, argv); }
