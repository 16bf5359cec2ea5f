#pragma once

#include <stdexcept>
#include <string>

namespace dnnreg {

/// Inputs whose shapes do not agree (feature count, weight length, ...).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or non-finite input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gradient descent produced a non-finite risk or gradient.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : std::runtime_error(what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace dnnreg
