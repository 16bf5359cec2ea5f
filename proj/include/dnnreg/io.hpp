#pragma once

#include "dnnreg/dataset.hpp"
#include "dnnreg/kernels.hpp"
#include "dnnreg/network.hpp"
#include "dnnreg/training.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

namespace dnnreg {

/// Reads a header row x1,...,xd,y followed by numeric rows. Throws DataError
/// on a malformed header, a ragged or non-numeric row, a non-finite value or
/// an empty body.
Dataset read_dataset_csv(std::istream& is);

void write_dataset_csv(std::ostream& os, const Dataset& data);

/// Everything needed to repeat a fit of the parallel-block estimate.
struct FitConfig {
    Architecture arch{800, 4, 8, 1};
    InitBounds bounds{1000.0, 20.0};
    /// Fixed number of gradient-descent steps; nullopt selects the adaptive rule.
    std::optional<std::size_t> fixed_steps;
    /// Stepsize of the fixed schedule; nullopt means 1 / fixed_steps.
    std::optional<double> lambda;
    ScheduleConfig schedule;
    double c12 = 10.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct FittedModel {
    WeightVector weights;
    double beta = 0.0;
    double lambda = 0.0;
    std::size_t steps = 0;
    std::string schedule;     // "fixed" or "adaptive"
    std::string stop_reason;  // for adaptive fits
    std::optional<std::size_t> doubling_index;
    std::size_t sample_size = 0;
    double training_risk = 0.0;
    std::optional<double> l2_error;  // against the synthetic regression function

    /// Truncated predictions at `count` row-major points.
    std::vector<double> predict(std::span<const double> rows, std::size_t count,
                                const kernels::LayerKernels& k = kernels::active()) const;
};

/// Fixed schedule: init_weights from substream(seed, {fit}) and gd_run.
/// Adaptive: adaptive_fit with `seed`.
FittedModel fit_model(const FitConfig& cfg, const Dataset& data,
                      const kernels::LayerKernels& k = kernels::active());

inline constexpr int kModelFormatVersion = 1;

/// Line-oriented text format: a "dnnreg-model <version>" line, key/value
/// lines, then "weights <count>" followed by one weight per line. Doubles
/// are written in shortest round-trip form.
void write_model(std::ostream& os, const FittedModel& model);

/// Throws DataError on an unknown version or malformed content.
FittedModel read_model(std::istream& is);

/// Columns x1..xd,prediction.
void write_predictions_csv(std::ostream& os, const Dataset& data,
                           std::span<const double> predictions);

}  // namespace dnnreg
