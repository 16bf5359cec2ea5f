#include "dnnreg/gradient.hpp"

#include "block_engine.hpp"
#include "dnnreg/errors.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dnnreg {

namespace {

// Rows ordered by the first covariate. Neighbouring lanes then saturate
// the logistic function together, which the vector kernels exploit.
std::vector<std::size_t> first_covariate_order(const Dataset& data) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data.x(a)[0] < data.x(b)[0]; });
    return order;
}

Dataset reordered(const Dataset& data, const std::vector<std::size_t>& order) {
    std::vector<double> xs;
    std::vector<double> ys;
    xs.reserve(data.xs().size());
    ys.reserve(data.size());
    for (std::size_t i : order) {
        const auto row = data.x(i);
        xs.insert(xs.end(), row.begin(), row.end());
        ys.push_back(data.y(i));
    }
    return Dataset(data.dim(), std::move(xs), std::move(ys));
}

}  // namespace

RiskEvaluator::RiskEvaluator(const Architecture& arch, const Dataset& data,
                             const kernels::LayerKernels& k, std::size_t cache_limit)
    : arch_(arch), engine_(std::make_unique<detail::BlockEngine>(arch, k)) {
    if (data.dim() != arch.input_dim) {
        throw DimensionError("dataset has dimension " + std::to_string(data.dim()) +
                             ", network expects " + std::to_string(arch.input_dim));
    }
    const std::vector<std::size_t> order = first_covariate_order(data);
    const Dataset sorted = reordered(data, order);
    lane_of_.resize(order.size());
    for (std::size_t lane = 0; lane < order.size(); ++lane) lane_of_[order[lane]] = lane;
    panel_ = SamplePanel::from_rows(sorted.xs(), sorted.dim(), sorted.size());
    ys_.assign(panel_.lanes, 0.0);
    std::copy(sorted.ys().begin(), sorted.ys().end(), ys_.begin());
    out_.assign(panel_.lanes, 0.0);
    coef_.assign(panel_.lanes, 0.0);
    const std::size_t cache_size = arch_.blocks * engine_->activation_size(panel_.lanes);
    if (cache_size <= cache_limit) cache_.assign(cache_size, 0.0);
}

RiskEvaluator::~RiskEvaluator() = default;
RiskEvaluator::RiskEvaluator(RiskEvaluator&&) noexcept = default;
RiskEvaluator& RiskEvaluator::operator=(RiskEvaluator&&) noexcept = default;

void RiskEvaluator::check(std::span<const double> weights) const {
    if (weights.size() != param_count(arch_)) {
        throw DimensionError("risk evaluator: weight vector length mismatch");
    }
}

double RiskEvaluator::residuals(std::span<const double> weights, bool keep_activations) {
    double* cache = keep_activations && !cache_.empty() ? cache_.data() : nullptr;
    engine_->forward_all(weights, panel_.values.data(), out_.data(), panel_.lanes, cache);
    const double n = static_cast<double>(panel_.count);
    for (std::size_t s = 0; s < panel_.count; ++s) coef_[s] = 2.0 * (out_[s] - ys_[s]) / n;
    // Summed in the caller's sample order so the value does not depend on
    // the lane layout.
    double sum = 0.0;
    for (std::size_t lane : lane_of_) {
        const double e = out_[lane] - ys_[lane];
        sum += e * e;
    }
    return sum / n;
}

double RiskEvaluator::risk(std::span<const double> weights) {
    check(weights);
    return residuals(weights, false);
}

double RiskEvaluator::risk_and_gradient(std::span<const double> weights, std::span<double> grad) {
    check(weights);
    if (grad.size() != weights.size()) throw DimensionError("gradient buffer length mismatch");
    const double value = residuals(weights, true);
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t per = block_param_count(arch_);
    const std::size_t lanes = panel_.lanes;
    const double* x = panel_.values.data();
    for (std::size_t k = 0; k < arch_.blocks; ++k) {
        const double* block_w = weights.data() + k * per;
        const double* acts = nullptr;
        if (!cache_.empty()) {
            acts = cache_.data() + k * engine_->activation_size(lanes);
        } else {
            double* scratch = engine_->scratch(lanes);
            engine_->forward_block(block_w, x, scratch, lanes);
            acts = scratch;
        }
        engine_->backward_block(block_w, x, acts, coef_.data(), grad.data() + k * per, lanes);
    }
    return value;
}

double empirical_risk(const WeightVector& w, const Dataset& data) {
    RiskEvaluator eval(w.arch(), data);
    return eval.risk(w.values());
}

std::vector<double> gradient(const WeightVector& w, const Dataset& data) {
    RiskEvaluator eval(w.arch(), data);
    std::vector<double> grad(w.size());
    eval.risk_and_gradient(w.values(), grad);
    return grad;
}

std::vector<double> fd_gradient(const WeightVector& w, const Dataset& data, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    RiskEvaluator eval(w.arch(), data, kernels::scalar_kernels());
    std::vector<double> probe(w.values().begin(), w.values().end());
    std::vector<double> grad(w.size());
    for (std::size_t j = 0; j < probe.size(); ++j) {
        const double saved = probe[j];
        probe[j] = saved + h;
        const double up = eval.risk(probe);
        probe[j] = saved - h;
        const double down = eval.risk(probe);
        probe[j] = saved;
        grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace dnnreg
