#pragma once

// Fully connected logistic networks trained with ADAM, used as the
// comparison estimate.

#include "dnnreg/dataset.hpp"
#include "dnnreg/kernels.hpp"
#include "dnnreg/random.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dnnreg {

/// Hidden layer widths k_1..k_L over inputs of dimension d. The output is
/// sum_j w_j f_j^{(L)}(x) without a bias.
struct FcArchitecture {
    std::vector<std::size_t> widths;
    std::size_t input_dim = 1;

    /// Throws std::invalid_argument unless all sizes are positive and at
    /// least one hidden layer is present.
    void validate() const;

    static FcArchitecture uniform(std::size_t layers, std::size_t width, std::size_t input_dim);

    friend bool operator==(const FcArchitecture&, const FcArchitecture&) = default;
};

/// Weights are stored layer by layer, each hidden layer row-major with the
/// bias first, followed by the k_L output weights.
std::size_t fc_param_count(const FcArchitecture& arch);

/// Offset of hidden layer l (0-based); l == widths.size() gives the output weights.
std::size_t fc_layer_offset(const FcArchitecture& arch, std::size_t layer);

/// Direct evaluation at one point. Throws DimensionError on shape mismatch.
double fc_forward(const FcArchitecture& arch, std::span<const double> weights,
                  std::span<const double> x);

/// Empirical L2 risk, gradient and batch predictions of a fully connected
/// net on a fixed sample.
class FcEvaluator {
public:
    FcEvaluator(FcArchitecture arch, const Dataset& data,
                const kernels::LayerKernels& k = kernels::active());

    double risk_and_gradient(std::span<const double> weights, std::span<double> grad);
    double risk(std::span<const double> weights);

    const FcArchitecture& arch() const { return arch_; }

    /// Network outputs from the last evaluation, one per sample.
    std::span<const double> outputs() const { return {out_.data(), panel_.count}; }

private:
    void forward(std::span<const double> weights);

    FcArchitecture arch_;
    const kernels::LayerKernels* k_;
    SamplePanel panel_;
    std::vector<double> ys_;
    std::vector<double> out_;
    std::vector<double> coef_;
    std::vector<std::vector<double>> acts_;
    std::vector<double> delta_a_;
    std::vector<double> delta_b_;
};

/// Predictions for `count` row-major points.
std::vector<double> fc_predict(const FcArchitecture& arch, std::span<const double> weights,
                               std::span<const double> rows, std::size_t count,
                               const kernels::LayerKernels& k = kernels::active());

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

struct AdamState {
    explicit AdamState(std::size_t size) : m(size, 0.0), v(size, 0.0) {}

    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;
};

/// One bias-corrected ADAM update of `weights` with gradient `grad`.
void adam_step(AdamState& state, std::span<double> weights, std::span<const double> grad,
               const AdamConfig& cfg);

enum class InitKind { paper_style, glorot_uniform, glorot_normal, he_uniform, he_normal };

/// Starting weights of a fully connected net. paper_style draws the input
/// layer (weights and biases) uniformly on [-a, a], the other hidden layers
/// uniformly on [-b, b] and sets the output weights to zero. The Glorot and
/// He rules scale by fan-in (and fan-out) per layer, output layer included,
/// with zero biases.
struct InitScheme {
    InitKind kind = InitKind::paper_style;
    double a = 1000.0;
    double b = 20.0;

    void validate() const;

    friend bool operator==(const InitScheme&, const InitScheme&) = default;
};

std::string_view to_string(InitKind kind);

/// Accepts paper, glorot-uniform, glorot-normal, he-uniform, he-normal.
InitKind parse_init_kind(std::string_view name);

std::vector<double> fc_init(const FcArchitecture& arch, const InitScheme& scheme, Rng& rng);

/// ADAM from `w0` for `steps` full-batch steps. `checkpoints` (ascending)
/// lists step counts at which `on_checkpoint(step, weights)` is called.
/// Throws DivergenceError on a non-finite risk or gradient.
std::vector<double> fc_train(const FcArchitecture& arch, std::vector<double> w0,
                             const Dataset& data, const AdamConfig& adam, std::size_t steps,
                             const std::vector<std::size_t>& checkpoints,
                             const std::function<void(std::size_t, std::span<const double>)>&
                                 on_checkpoint,
                             const kernels::LayerKernels& k = kernels::active());

/// Width and step-count grid selected by splitting of the sample.
struct BaselineConfig {
    std::size_t hidden_layers = 4;
    std::vector<std::size_t> widths{10, 25, 50, 100, 200};
    std::vector<std::size_t> steps{500, 1000, 2000};
    InitScheme scheme;
    AdamConfig adam;
    std::size_t n_train = 80;
    std::size_t n_test = 20;
    double c12 = 10.0;

    void validate(std::size_t n) const;
};

struct BaselineCell {
    std::size_t width = 0;
    std::size_t steps = 0;
    double holdout_risk = 0.0;
    bool diverged = false;
};

struct BaselineFit {
    FcArchitecture arch;
    std::vector<double> weights;
    std::size_t steps = 0;
    double beta = 0.0;                // truncation level
    std::vector<BaselineCell> cells;  // width-major, then steps
    std::size_t chosen = 0;           // index into cells

    /// Truncated predictions.
    std::vector<double> predict(std::span<const double> rows, std::size_t count,
                                const kernels::LayerKernels& k = kernels::active()) const;
};

/// Trains one net per width on the first n_train points up to the largest
/// step count, scores the truncated predictor on the next n_test points at
/// every listed step count and returns the first minimizer (width-major
/// order). Width j starts from fc_init with substream(seed, {grid, j}).
/// A width whose training diverges is flagged in `cells` and skipped;
/// DivergenceError is thrown only if every width diverges.
BaselineFit train_baseline(const BaselineConfig& cfg, const Dataset& data, std::uint64_t seed,
                           const kernels::LayerKernels& k = kernels::active());

}  // namespace dnnreg
