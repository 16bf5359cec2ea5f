#pragma once

#include "dnnreg/dataset.hpp"
#include "dnnreg/random.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dnnreg::sim {

/// Piecewise regression function on [-1, 1] with breaks at -0.5, 0 and 0.5.
/// Throws std::domain_error outside [-1, 1].
double eval_m(double x);

/// Conditional standard deviation 0.2 - 0.1 cos(2 pi x).
double eval_noise_scale(double x);

/// Standard normal restricted to [-1, 1], by rejection.
double sample_x(Rng& rng);

/// Normalizing constant 2 Phi(1) - 1 of the covariate density.
double covariate_mass();

/// Density of the covariate law, zero outside [-1, 1].
double covariate_density(double x);

/// Cumulative distribution function of the covariate law.
double covariate_cdf(double x);

/// n pairs with Y = m(X) + noise_factor * s(X) * N. Covariate and noise
/// draws alternate per sample, so noise_factor = 0 gives the same
/// covariates with noiseless responses.
Dataset generate_dataset(std::size_t n, Rng& rng, double noise_factor = 1.0);

/// Composite Gauss-Legendre rule for the integral against the covariate
/// law: every smooth piece of m is split into equal panels carrying a
/// 64-point rule. Weights already include the density.
class L2Quadrature {
public:
    explicit L2Quadrature(std::size_t panels_per_piece = 64);

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

    /// sum_i w_i (values[i] - m(node_i))^2 for predictions at nodes().
    /// Throws DataError on non-finite predictions.
    double error(std::span<const double> values) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> target_;
};

/// Shared default rule.
const L2Quadrature& default_quadrature();

/// Integral of (predictor - m)^2 against the covariate law.
double l2_error(const std::function<double(double)>& predictor);

/// Same, with all nodes evaluated in one call.
double l2_error_batch(const std::function<std::vector<double>(std::span<const double>)>& predictor);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean of (predictor(X) - m(X))^2 over `draws` covariates from the
/// model law, with its standard error.
MonteCarloEstimate monte_carlo_l2(
    const std::function<std::vector<double>(std::span<const double>)>& predictor,
    std::size_t draws, Rng& rng);

/// Linear interpolation between order statistics (type 7). p in [0, 1].
double quantile(std::vector<double> values, double p);

struct Spread {
    double median = 0.0;
    double iqr = 0.0;
};

/// Median and Q3 - Q1 by quantile(); throws std::invalid_argument if empty.
Spread median_iqr(const std::vector<double>& values);

}  // namespace dnnreg::sim
