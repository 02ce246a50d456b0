#pragma once

#include <stdexcept>
#include <string>

namespace tfi {

/// Invalid disorder or tuning parameters.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Chain length out of the supported range.
class SizeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bad index, window or count passed to an operation.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The operation has no meaning for the given disorder kind.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Problem too large for a dense route.
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite input or a numerical breakdown.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tfi
