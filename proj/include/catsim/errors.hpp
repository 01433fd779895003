#ifndef CATSIM_ERRORS_HPP
#define CATSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace catsim {

// Malformed input text (CSV rows, tree files, q-table files).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that violates a domain invariant.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad experiment configuration (unknown key, out-of-range value).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace catsim

#endif
