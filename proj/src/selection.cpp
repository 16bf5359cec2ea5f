#include "dnnreg/selection.hpp"

#include "dnnreg/errors.hpp"

#include <stdexcept>
#include <string>

namespace dnnreg {

void SplitSpec::validate(std::size_t n) const {
    if (grid.empty()) throw std::invalid_argument("selection grid is empty");
    if (n_train == 0 || n_test == 0) {
        throw std::invalid_argument("training and testing parts must be non-empty");
    }
    if (n < n_train + n_test) {
        throw DimensionError("sample of size " + std::to_string(n) + " cannot be split into " +
                             std::to_string(n_train) + " + " + std::to_string(n_test));
    }
    for (const auto& b : grid) b.validate();
}

std::vector<InitBounds> bounds_grid(const std::vector<double>& a_values,
                                    const std::vector<double>& b_values) {
    std::vector<InitBounds> grid;
    for (double a : a_values) {
        for (double b : b_values) grid.push_back({a, b});
    }
    return grid;
}

double holdout_risk(const WeightVector& w, const Dataset& data, double beta,
                    const kernels::LayerKernels& k) {
    if (!(beta > 0.0)) throw std::invalid_argument("truncation level must be positive");
    const auto pred = predict_batch(w, data.xs(), data.size(), k);
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double e = data.y(i) - truncate(pred[i], beta);
        sum += e * e;
    }
    return sum / static_cast<double>(data.size());
}

SelectionResult split_select(const Architecture& arch, const Dataset& data, const SplitSpec& spec,
                             const ScheduleConfig& cfg, std::uint64_t seed, double c12,
                             const kernels::LayerKernels& k) {
    spec.validate(data.size());
    const Dataset train = data.slice(0, spec.n_train);
    const Dataset test = data.slice(spec.n_train, spec.n_test);
    const double beta = truncation_level(spec.n_train, c12);

    SelectionResult result;
    for (std::size_t j = 0; j < spec.grid.size(); ++j) {
        Rng cell = substream(seed, {stream::grid, j});
        ScheduleOutcome fit = adaptive_fit(arch, spec.grid[j], train, cfg, cell(), k);
        const double risk = holdout_risk(fit.weights, test, beta, k);
        result.holdout_risks.push_back(risk);
        if (j == 0 || risk < result.holdout_risks[result.chosen_index]) {
            result.chosen_index = j;
            result.chosen = spec.grid[j];
            result.model = std::move(fit);
        }
    }
    return result;
}

}  // namespace dnnreg
