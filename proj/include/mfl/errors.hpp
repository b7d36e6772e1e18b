#pragma once

#include <stdexcept>
#include <string>

namespace mfl {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inconsistent matrix/vector shapes or invalid argument values.
struct dimension_error : error {
    using error::error;
};

/// Bad run configuration (unknown keys, invalid values). CLI exit code 2.
struct config_error : error {
    using error::error;
};

/// Training blew up (non-finite update or runaway particle norms). CLI exit code 3.
struct divergence_error : error {
    using error::error;
};

/// File read/write failure. CLI exit code 4.
struct io_error : error {
    using error::error;
};

/// Numerical failure (factorization of non-finite input, degenerate diagnostics).
struct numeric_error : error {
    using error::error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw dimension_error(msg);
}

} // namespace detail

} // namespace mfl
