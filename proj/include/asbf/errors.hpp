#pragma once
#include <stdexcept>
#include <string>

namespace asbf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract input data. CLI maps this to exit code 2.
struct ValidationError : Error {
    using Error::Error;
};

// Hyperparameter combinations that cannot be honored. CLI exit code 3.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace asbf
