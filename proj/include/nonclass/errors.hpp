#pragma once

#include <stdexcept>
#include <string>

namespace nonclass {

// Rejected inputs: malformed documents, violated preconditions, bad parameters.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failures: divergent series, unreachable tolerances, truncation guards.
class numerics_error : public std::runtime_error {
public:
    explicit numerics_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nonclass
