#pragma once

// Layer-level numeric kernels shared by the parallel-block network and the
// fully connected baseline.
//
// Activations are stored as panels: one row of `lanes` contiguous doubles
// per neuron, one column per sample. `lanes` is always a multiple of
// kLaneMultiple; padded columns carry arbitrary finite data and are masked
// out by the caller through zero loss coefficients.
//
// Weight rows are laid out bias first: row i of a layer with fan-in f is
// weights[i*(f+1) + 0] (bias), weights[i*(f+1) + 1 + j] (input j).

#include <cstddef>
#include <string>
#include <string_view>

namespace dnnreg::kernels {

inline constexpr std::size_t kLaneMultiple = 8;

constexpr std::size_t padded_lanes(std::size_t n) {
    return (n + kLaneMultiple - 1) / kLaneMultiple * kLaneMultiple;
}

enum class Isa { scalar, avx2 };

struct LayerKernels {
    Isa isa;
    const char* name;

    // out[i][s] = sigmoid(bias_i + sum_j w_ij * in[j][s])
    void (*sigmoid_layer)(const double* weights, std::size_t rows, std::size_t fan_in,
                          const double* in, double* out, std::size_t lanes);

    // On entry delta[i][s] = dLoss/d out[i][s]; on exit dLoss/d preactivation.
    // grad (rows x (fan_in+1)) is accumulated into. delta_in (fan_in x lanes)
    // is overwritten with dLoss/d in unless null.
    void (*sigmoid_layer_backward)(const double* weights, std::size_t rows, std::size_t fan_in,
                                   const double* in, const double* act, double* delta,
                                   double* grad, double* delta_in, std::size_t lanes);

    // out[s] = sum_j w[j] * in[j][s]   (no bias)
    void (*linear_layer)(const double* w, std::size_t fan_in, const double* in, double* out,
                         std::size_t lanes);

    // grad[j] += sum_s coef[s] * in[j][s]; delta_in[j][s] = w[j] * coef[s] unless null.
    void (*linear_layer_backward)(const double* w, std::size_t fan_in, const double* in,
                                  const double* coef, double* grad, double* delta_in,
                                  std::size_t lanes);

    // y[s] += alpha * x[s]; any length.
    void (*axpy)(double alpha, const double* x, double* y, std::size_t lanes);

    // sum_s x[s] * y[s]; any length.
    double (*dot)(const double* x, const double* y, std::size_t lanes);

    // Elementwise logistic function; count is a multiple of kLaneMultiple.
    void (*sigmoid)(const double* z, double* out, std::size_t count);
};

const LayerKernels& scalar_kernels();

/// AVX2+FMA table, or nullptr when the build or the CPU lacks support.
const LayerKernels* avx2_kernels();

bool available(Isa isa);

/// Widest instruction set available on this machine.
Isa best_available();

/// Throws std::runtime_error if `isa` is unavailable.
const LayerKernels& kernels_for(Isa isa);

/// Process-wide default used when no table is passed explicitly. Starts as
/// best_available(), or the value of DNNREG_KERNEL (scalar|avx2) if set.
const LayerKernels& active();
void set_active(Isa isa);

std::string_view to_string(Isa isa);

/// Accepts "scalar", "avx2" and "auto"; throws std::invalid_argument otherwise.
Isa parse_isa(std::string_view name);

}  // namespace dnnreg::kernels
