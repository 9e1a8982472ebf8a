#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cycsig {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid arguments or configuration detected before any computation.
struct ConfigError : Error {
    using Error::Error;
};

struct IntegrationFailure : Error {
    IntegrationFailure(const std::string& what, std::size_t index)
        : Error(what + " (sample " + std::to_string(index) + ")"), index(index) {}
    std::size_t index;
};

struct LiftFailure : Error {
    LiftFailure(const std::string& what, std::size_t index)
        : Error(what + " (sample " + std::to_string(index) + ")"), index(index) {}
    std::size_t index;
};

// A data edge joins two boxes that do not share a face; happens when the
// evaluation radius is too large for the grid.
struct EdgeTooLong : Error {
    using Error::Error;
};

}  // namespace cycsig
