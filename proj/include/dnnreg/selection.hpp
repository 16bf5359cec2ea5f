#pragma once

#include "dnnreg/training.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dnnreg {

/// Split of a sample into a training part (the first n_train points) and a
/// testing part (the next n_test points), with the candidate bounds to try.
struct SplitSpec {
    std::size_t n_train = 80;
    std::size_t n_test = 20;
    std::vector<InitBounds> grid;

    /// Throws std::invalid_argument for an empty grid or an empty part, and
    /// DimensionError if the sample has fewer than n_train + n_test points.
    void validate(std::size_t n) const;
};

/// Holdout selection grid A x B in row order (A varies slowest).
std::vector<InitBounds> bounds_grid(const std::vector<double>& a_values,
                                    const std::vector<double>& b_values);

struct SelectionResult {
    InitBounds chosen;
    std::size_t chosen_index = 0;
    ScheduleOutcome model;              // fitted on the training part only
    std::vector<double> holdout_risks;  // one per grid entry
};

/// Fits the adaptive estimate on the training part for every candidate and
/// keeps the one whose truncated predictor has the smallest mean squared
/// error on the testing part (first minimizer in grid order). The truncation
/// level is c12 * ln(n_train). Candidate j uses the fit seed drawn from
/// substream(seed, {grid, j}).
SelectionResult split_select(const Architecture& arch, const Dataset& data, const SplitSpec& spec,
                             const ScheduleConfig& cfg, std::uint64_t seed, double c12 = 10.0,
                             const kernels::LayerKernels& k = kernels::active());

/// Mean squared error of the truncated predictor on `data`.
double holdout_risk(const WeightVector& w, const Dataset& data, double beta,
                    const kernels::LayerKernels& k = kernels::active());

}  // namespace dnnreg
