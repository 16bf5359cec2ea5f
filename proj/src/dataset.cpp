#include "dnnreg/dataset.hpp"

#include "dnnreg/errors.hpp"
#include "dnnreg/kernels.hpp"

#include <cmath>
#include <string>

namespace dnnreg {

Dataset::Dataset(std::size_t dim, std::vector<double> xs, std::vector<double> ys)
    : dim_(dim), xs_(std::move(xs)), ys_(std::move(ys)) {
    if (dim_ == 0) throw DimensionError("dataset: dimension must be positive");
    if (ys_.empty()) throw DataError("dataset: at least one sample is required");
    if (xs_.size() != ys_.size() * dim_) {
        throw DimensionError("dataset: " + std::to_string(xs_.size()) + " covariate values for " +
                             std::to_string(ys_.size()) + " responses of dimension " +
                             std::to_string(dim_));
    }
    for (double v : xs_) {
        if (!std::isfinite(v)) throw DataError("dataset: non-finite covariate");
    }
    for (double v : ys_) {
        if (!std::isfinite(v)) throw DataError("dataset: non-finite response");
    }
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
    if (first + count > size()) throw DimensionError("dataset slice out of range");
    std::vector<double> xs(xs_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                           xs_.begin() + static_cast<std::ptrdiff_t>((first + count) * dim_));
    std::vector<double> ys(ys_.begin() + static_cast<std::ptrdiff_t>(first),
                           ys_.begin() + static_cast<std::ptrdiff_t>(first + count));
    return Dataset(dim_, std::move(xs), std::move(ys));
}

Dataset Dataset::with_responses(std::vector<double> ys) const {
    return Dataset(dim_, xs_, std::move(ys));
}

SamplePanel SamplePanel::from_rows(std::span<const double> rows, std::size_t dim,
                                   std::size_t count) {
    if (rows.size() < dim * count) throw DimensionError("sample panel: too few values");
    SamplePanel panel;
    panel.count = count;
    panel.dim = dim;
    panel.lanes = kernels::padded_lanes(count);
    panel.values.assign(dim * panel.lanes, 0.0);
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t j = 0; j < dim; ++j) {
            panel.values[j * panel.lanes + s] = rows[s * dim + j];
        }
    }
    return panel;
}

}  // namespace dnnreg
