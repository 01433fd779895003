#ifndef CATSIM_CLI_HPP
#define CATSIM_CLI_HPP

#include <string>
#include <vector>

namespace catsim {

// Full command-line entry point (argv without the program name), exposed
// as a library call so tests can drive the real surface in-process.
// Returns the process exit code.
int run_cli(const std::vector<std::string>& args);

} // namespace catsim

#endif
