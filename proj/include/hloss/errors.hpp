#pragma once

#include <stdexcept>
#include <string>

namespace hloss {

/// Invalid argument or malformed input supplied by the caller.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Tree, dataset or checkpoint document that cannot be interpreted.
class ParseError : public InputError {
public:
    using InputError::InputError;
};

/// Numerical failure during an iterative procedure (divergence, non-finite values).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hloss
