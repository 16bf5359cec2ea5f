#pragma once

#include "dnnreg/dataset.hpp"
#include "dnnreg/kernels.hpp"
#include "dnnreg/network.hpp"

#include <memory>
#include <span>
#include <vector>

namespace dnnreg {

namespace detail {
class BlockEngine;
}

/// Empirical L2 risk F_n(w) = (1/n) sum_i (f_w(x_i) - y_i)^2 and its
/// gradient on a fixed dataset. Keeps the transposed sample panel and all
/// scratch buffers, so repeated evaluations (gradient descent) allocate
/// nothing.
///
/// The gradient is computed in two sweeps over the blocks: the first
/// produces the network outputs and residuals, the second back-propagates
/// (2/n)(f_w(x_i) - y_i) through each block. Activations from the first
/// sweep are kept when they fit in `cache_limit` doubles, otherwise
/// each block is re-evaluated.
///
/// Samples are held sorted by their first covariate, which only changes the
/// summation order.
class RiskEvaluator {
public:
    static constexpr std::size_t kActivationCacheLimit = std::size_t{1} << 27;

    RiskEvaluator(const Architecture& arch, const Dataset& data,
                  const kernels::LayerKernels& k = kernels::active(),
                  std::size_t cache_limit = kActivationCacheLimit);
    ~RiskEvaluator();

    RiskEvaluator(RiskEvaluator&&) noexcept;
    RiskEvaluator& operator=(RiskEvaluator&&) noexcept;

    double risk(std::span<const double> weights);

    /// Writes the gradient into `grad` (param_count values) and returns the risk.
    double risk_and_gradient(std::span<const double> weights, std::span<double> grad);

    const Architecture& arch() const { return arch_; }
    std::size_t sample_count() const { return panel_.count; }

private:
    void check(std::span<const double> weights) const;
    double residuals(std::span<const double> weights, bool keep_activations);

    Architecture arch_;
    SamplePanel panel_;
    std::vector<double> ys_;    // padded with zeros
    std::vector<double> out_;   // network outputs
    std::vector<double> coef_;  // 2/n * residual, zero on padding
    std::vector<double> cache_;
    std::vector<std::size_t> lane_of_;  // lane holding each input sample
    std::unique_ptr<detail::BlockEngine> engine_;
};

double empirical_risk(const WeightVector& w, const Dataset& data);

std::vector<double> gradient(const WeightVector& w, const Dataset& data);

/// Central differences (F(w + h e_j) - F(w - h e_j)) / 2h for every weight.
std::vector<double> fd_gradient(const WeightVector& w, const Dataset& data, double h = 1e-5);

}  // namespace dnnreg
