#pragma once

#include <stdexcept>
#include <string>

namespace xlalign {

// Bad configuration: unknown keys, invalid mode names, out-of-range hyperparameters.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data: unreadable files, malformed records, empty corpora.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values where finite math was required (NaN loss, diverged run).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace xlalign
