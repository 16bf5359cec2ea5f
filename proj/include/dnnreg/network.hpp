#pragma once

#include "dnnreg/architecture.hpp"
#include "dnnreg/kernels.hpp"
#include "dnnreg/random.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dnnreg {

/// All weights of a parallel-block network as one flat vector, in the order
/// defined by flat_index().
class WeightVector {
public:
    WeightVector() = default;

    /// All-zero weights.
    explicit WeightVector(const Architecture& arch);

    /// Throws DimensionError unless values.size() == param_count(arch).
    WeightVector(const Architecture& arch, std::vector<double> values);

    const Architecture& arch() const { return arch_; }
    std::size_t size() const { return values_.size(); }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double operator[](std::size_t flat) const { return values_[flat]; }
    double& operator[](std::size_t flat) { return values_[flat]; }

    double at(const StructuredIndex& idx) const { return values_[flat_index(arch_, idx)]; }
    double& at(const StructuredIndex& idx) { return values_[flat_index(arch_, idx)]; }

    /// Output weight w^{(L)}_{k,1,1} of block k (0-based).
    double outer(std::size_t block) const;

    /// Weights of one block, block_param_count(arch) values.
    std::span<const double> block(std::size_t k) const;

    bool all_finite() const;

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
    Architecture arch_;
    std::vector<double> values_;
};

/// Random starting weights: output weights zero, input-level weights
/// uniform on [-a, a], all other levels uniform on [-b, b], independent
/// draws in flat order.
WeightVector init_weights(const Architecture& arch, const InitBounds& bounds, Rng& rng);

/// 1 / (1 + exp(-z)), evaluated without overflow.
double logistic(double z);

/// Network output at one point, evaluated level by level from the
/// structured weights. Throws DimensionError if x.size() != input_dim.
double forward(const WeightVector& w, std::span<const double> x);

/// Clamp to [-beta, beta].
double truncate(double z, double beta);

double predict_truncated(const WeightVector& w, std::span<const double> x, double beta);

/// Truncation level c12 * ln(n).
double truncation_level(std::size_t n, double c12 = 10.0);

/// Network outputs for `count` row-major points, computed with the layer
/// kernels. Equals forward() up to rounding.
std::vector<double> predict_batch(const WeightVector& w, std::span<const double> rows,
                                  std::size_t count,
                                  const kernels::LayerKernels& k = kernels::active());

}  // namespace dnnreg
