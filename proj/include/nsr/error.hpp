#pragma once

#include <stdexcept>
#include <string>

namespace nsr {

/// Violated pre-condition on shapes or call order.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Out-of-range scalar parameter (step size, eps, alpha, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input data (non-finite entries, wrong sizes, bad files).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nsr
