#pragma once

#include <stdexcept>
#include <string>

namespace ncomp {

// Invalid shapes, widths or option combinations.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A data word that does not decode to a valid configuration of its domain.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reading from an empty memory and similar misuse of the memory primitives.
struct MemoryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Task sampling or oracle search gave up (rejection cap, unreachable goal).
struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training produced non-finite values.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ncomp
