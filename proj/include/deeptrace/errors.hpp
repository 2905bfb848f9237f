#pragma once

#include <stdexcept>
#include <string>

namespace deeptrace {

/// Malformed or inconsistent input data (bad edge lists, infeasible
/// parameters, version mismatches, parse failures). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure (degenerate denominators, divergent training,
/// non-finite intermediates). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace deeptrace
