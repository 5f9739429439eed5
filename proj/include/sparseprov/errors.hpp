#pragma once

#include <stdexcept>
#include <string>

namespace sparseprov {

// Raised on malformed input: bad files, bad configs, parameters outside their domain.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a request is well-formed but cannot be satisfied (budget too small,
// edge count outside [n-1, n(n-1)/2], ...).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a combinatorial enumeration would exceed its configured cap.
class CapExceededError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sparseprov
