#pragma once

#include <stdexcept>
#include <string>

namespace hypwalk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structural misuse: mixing elements/points of different geometry backends.
struct BackendMismatch : Error {
    using Error::Error;
};

// A half-plane orbit left the range where doubles can represent Im z.
struct PrecisionLoss : Error {
    using Error::Error;
};

// A boundary point is not resolved deeply enough for the requested operation.
struct InsufficientResolution : Error {
    using Error::Error;
};

// Configured resource cap exceeded (convolution support, walk length, ...).
struct ResourceLimit : Error {
    using Error::Error;
};

struct EstimatorFailure : Error {
    using Error::Error;
};

struct ConfigError : Error {
    int line = 0;
    ConfigError(const std::string& msg, int line_no = 0)
        : Error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
          line(line_no) {}
};

}  // namespace hypwalk
