#pragma once

#include <stdexcept>
#include <string>

namespace qread {

/// Invalid parameters or model configuration. CLI exit code 1.
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested computation exceeds the cell/memory budget. CLI exit code 2.
class budget_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative refinement failed to converge within its cap. CLI exit code 3.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A truncated distribution lost more probability mass than allowed.
class mass_deficit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qread
