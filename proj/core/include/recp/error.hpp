#pragma once

#include <stdexcept>
#include <string>

namespace recp {

// Thrown when an operation is called outside its documented domain
// (empty sample, rate outside (0,1), too few groups, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A working-model fit that has no finite optimum (separated data under
// plain maximum likelihood, flat likelihood, Newton divergence).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Degenerate input for density estimation (zero spread in a coordinate).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw PreconditionError(what);
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError(what);
}

} // namespace detail
} // namespace recp
