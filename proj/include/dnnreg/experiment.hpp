#pragma once

// Replicated simulation runs: one cell is one estimator configuration,
// applied to R independent samples of the synthetic model.

#include "dnnreg/baseline.hpp"
#include "dnnreg/kernels.hpp"
#include "dnnreg/selection.hpp"
#include "dnnreg/simulation.hpp"
#include "dnnreg/training.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dnnreg {

enum class Method {
    fixed,     // init_weights + gd_run(lambda, steps)
    adaptive,  // adaptive_fit
    split,     // split_select over bounds grid
    baseline,  // train_baseline (width and step grid, ADAM)
    fc_fixed,  // one fully connected net, ADAM, fixed step count
};

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct CellConfig {
    std::string label;
    Method method = Method::fixed;
    std::size_t n = 100;
    Architecture arch{800, 4, 8, 1};
    InitBounds bounds{1000.0, 20.0};
    std::size_t steps = 400;      // fixed
    double lambda = 1.0 / 400.0;  // fixed
    ScheduleConfig schedule;      // adaptive, split
    SplitSpec split;              // split
    BaselineConfig baseline;      // baseline; fc_fixed uses widths[0] and steps[0]
    double c12 = 10.0;

    /// Throws std::invalid_argument on an inconsistent configuration.
    void validate() const;
};

struct Replication {
    std::size_t index = 0;
    double l2_error = 0.0;
    bool diverged = false;
    std::size_t steps = 0;  // t_n (chosen step count for baseline)
    double lambda = 0.0;    // 0 for ADAM methods
    std::optional<std::size_t> doubling_index;
    std::string stop_reason;
    std::string selected;  // chosen grid entry, e.g. "a=100;b=20" or "width=50;steps=500"
};

struct CellResult {
    CellConfig cell;
    std::vector<Replication> reps;

    std::size_t valid() const;
    /// Median and IQR over replications that did not diverge.
    std::optional<sim::Spread> spread() const;
    /// Replications whose t_n differs from K/2 (adaptive and split cells).
    std::optional<std::size_t> steps_differ_from_half_k() const;
};

/// Prediction curves for the first `reps` replications of every cell.
struct CurveRequest {
    std::size_t points = 1001;
    std::size_t reps = 1;  // replications 0..reps-1 of every cell
};

struct Curve {
    std::string label;
    std::size_t rep = 0;
    std::vector<double> xs;
    std::vector<double> fitted;  // empty if the fit diverged
};

struct ExperimentSpec {
    std::string name;
    std::vector<CellConfig> cells;
    std::uint64_t seed = 1;
    std::size_t reps = 25;
    CurveRequest curves;
};

struct ExperimentResult {
    std::vector<CellResult> cells;
    std::vector<Curve> curves;

    bool any_diverged() const;
};

/// Replication `rep` of `cell`. The sample is drawn from
/// substream(seed, {data, rep}), shared by all cells of an experiment; the
/// fit randomness comes from substream(seed, {fit, rep}). Divergence is
/// caught and flagged. If `curve` is non-null and the fit succeeded, the
/// truncated estimate is evaluated at curve->xs.
Replication run_replication(const CellConfig& cell, std::uint64_t seed, std::size_t rep,
                            Curve* curve = nullptr,
                            const kernels::LayerKernels& k = kernels::active());

/// All (cell, replication) pairs on `jobs` worker threads. The result does
/// not depend on `jobs`.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t jobs = 1,
                                const kernels::LayerKernels& k = kernels::active());

/// Named protocols: table1, table2, table3, table4, table5-nnfc, figure1.
/// Throws std::invalid_argument for an unknown name.
ExperimentSpec protocol(std::string_view name);
const std::vector<std::string>& protocol_names();

/// Uniform grid of `points` values covering [-1, 1].
std::vector<double> curve_grid(std::size_t points);

void write_replications_csv(std::ostream& os, const ExperimentResult& result);
void write_summary_csv(std::ostream& os, const ExperimentResult& result);
/// Columns x, m, fitted.
void write_curve_csv(std::ostream& os, const Curve& curve);

}  // namespace dnnreg
