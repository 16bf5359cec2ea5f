#include "dnnreg/network.hpp"

#include "block_engine.hpp"
#include "dnnreg/dataset.hpp"
#include "dnnreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dnnreg {

WeightVector::WeightVector(const Architecture& arch)
    : arch_(arch), values_(param_count(arch), 0.0) {}

WeightVector::WeightVector(const Architecture& arch, std::vector<double> values)
    : arch_(arch), values_(std::move(values)) {
    if (values_.size() != param_count(arch_)) {
        throw DimensionError("weight vector has " + std::to_string(values_.size()) +
                             " values, architecture " + to_string(arch_) + " needs " +
                             std::to_string(param_count(arch_)));
    }
}

double WeightVector::outer(std::size_t block) const {
    return values_[flat_index(arch_, {block, arch_.depth, 0, 1})];
}

std::span<const double> WeightVector::block(std::size_t k) const {
    const std::size_t per = block_param_count(arch_);
    return std::span<const double>(values_).subspan(k * per, per);
}

bool WeightVector::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

WeightVector init_weights(const Architecture& arch, const InitBounds& bounds, Rng& rng) {
    bounds.validate();
    WeightVector w(arch);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](double bound) { return bound == 0.0 ? 0.0 : -bound + 2.0 * bound * unit(rng); };

    const std::size_t input_end = level_offset(arch, 1);
    const std::size_t outer_at = level_offset(arch, arch.depth);
    const std::size_t per = block_param_count(arch);
    for (std::size_t k = 0; k < arch.blocks; ++k) {
        double* block = w.values().data() + k * per;
        for (std::size_t p = 0; p < per; ++p) {
            if (p < input_end) {
                block[p] = draw(bounds.a);
            } else if (p < outer_at) {
                block[p] = draw(bounds.b);
            } else {
                block[p] = 0.0;
            }
        }
    }
    return w;
}

double logistic(double z) {
    const double e = std::exp(-std::fabs(z));
    const double inv = 1.0 / (1.0 + e);
    return z >= 0.0 ? inv : e * inv;
}

double forward(const WeightVector& w, std::span<const double> x) {
    const Architecture& arch = w.arch();
    if (x.size() != arch.input_dim) {
        throw DimensionError("forward: input has dimension " + std::to_string(x.size()) +
                             ", network expects " + std::to_string(arch.input_dim));
    }
    std::vector<double> prev;
    std::vector<double> next;
    double total = 0.0;
    for (std::size_t k = 0; k < arch.blocks; ++k) {
        prev.assign(x.begin(), x.end());
        for (std::size_t l = 0; l < arch.depth; ++l) {
            const std::size_t rows = level_rows(arch, l);
            next.assign(rows, 0.0);
            for (std::size_t i = 0; i < rows; ++i) {
                double z = w.at({k, l, i, 0});
                for (std::size_t j = 0; j < prev.size(); ++j) z += w.at({k, l, i, j + 1}) * prev[j];
                next[i] = logistic(z);
            }
            prev.swap(next);
        }
        total += w.outer(k) * prev[0];
    }
    return total;
}

double truncate(double z, double beta) { return std::max(std::min(z, beta), -beta); }

double predict_truncated(const WeightVector& w, std::span<const double> x, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("truncation level must be positive");
    return truncate(forward(w, x), beta);
}

double truncation_level(std::size_t n, double c12) {
    return c12 * std::log(static_cast<double>(n));
}

std::vector<double> predict_batch(const WeightVector& w, std::span<const double> rows,
                                  std::size_t count, const kernels::LayerKernels& k) {
    const std::size_t dim = w.arch().input_dim;
    if (rows.size() != count * dim) {
        throw DimensionError("predict_batch: expected " + std::to_string(count * dim) +
                             " covariate values, got " + std::to_string(rows.size()));
    }
    constexpr std::size_t kChunk = 512;
    std::vector<double> result(count);
    detail::BlockEngine engine(w.arch(), k);
    std::vector<double> out;
    for (std::size_t first = 0; first < count; first += kChunk) {
        const std::size_t m = std::min(kChunk, count - first);
        const SamplePanel panel = SamplePanel::from_rows(rows.subspan(first * dim, m * dim), dim, m);
        out.assign(panel.lanes, 0.0);
        engine.forward_all(w.values(), panel.values.data(), out.data(), panel.lanes);
        std::copy_n(out.begin(), m, result.begin() + static_cast<std::ptrdiff_t>(first));
    }
    return result;
}

}  // namespace dnnreg
