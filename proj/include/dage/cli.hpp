#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dage {

// Executes one command line (without the program name) and returns the
// process exit code: 0 ok, 1 check failure, 2 config error, 3 data error,
// 4 numeric failure. Output streams are injectable so tests can run the
// CLI in-process.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

// argv-style entry point for the binary.
int run_cli(int argc, char** argv);

}  // namespace dage
