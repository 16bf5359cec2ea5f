#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dnnreg {

/// n pairs (x_i, y_i) with x_i in R^d, stored row-major.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::size_t dim, std::vector<double> xs, std::vector<double> ys);

    std::size_t size() const { return ys_.size(); }
    std::size_t dim() const { return dim_; }

    std::span<const double> x(std::size_t i) const { return {xs_.data() + i * dim_, dim_}; }
    double y(std::size_t i) const { return ys_[i]; }

    std::span<const double> xs() const { return xs_; }
    std::span<const double> ys() const { return ys_; }

    /// Copy of rows [first, first + count).
    Dataset slice(std::size_t first, std::size_t count) const;

    /// Same covariates, different responses.
    Dataset with_responses(std::vector<double> ys) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> xs_;
    std::vector<double> ys_;
};

/// Covariates transposed into a zero-padded feature-major panel for the
/// layer kernels: feature j of sample s sits at values[j * lanes + s].
struct SamplePanel {
    std::size_t count = 0;  // real samples
    std::size_t lanes = 0;  // padded column count
    std::size_t dim = 0;
    std::vector<double> values;

    /// Panel of `count` rows of a row-major matrix with `dim` columns.
    static SamplePanel from_rows(std::span<const double> rows, std::size_t dim, std::size_t count);
};

}  // namespace dnnreg
