#pragma once
#include <stdexcept>
#include <string>

namespace rfou {

// Thrown when a scalar argument is outside its admissible range.
struct parameter_error : std::invalid_argument {
    explicit parameter_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Thrown when an input contains NaN/Inf or violates a value-level precondition.
struct rejected_input_error : std::invalid_argument {
    explicit rejected_input_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Thrown when two objects that must share a grid (or a table that must exist) do not line up.
struct structural_error : std::logic_error {
    explicit structural_error(const std::string& msg) : std::logic_error(msg) {}
};

// Thrown when a numerical procedure fails (e.g. Cholesky on a non-PD matrix).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an estimator is evaluated on a path with zero observed information.
struct degenerate_estimate_error : std::runtime_error {
    explicit degenerate_estimate_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rfou
