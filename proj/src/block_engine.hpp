#pragma once

#include "dnnreg/architecture.hpp"
#include "dnnreg/kernels.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dnnreg::detail {

// Forward and reverse passes through one block at a time over a panel of
// samples. Activations of a block occupy depth * width * lanes doubles
// (level l at offset l * width * lanes); callers either use the engine's
// own scratch or pass storage for every block to keep them across sweeps.
class BlockEngine {
public:
    BlockEngine(const Architecture& arch, const kernels::LayerKernels& k);

    std::size_t activation_size(std::size_t lanes) const { return arch_.depth * arch_.width * lanes; }

    // Single-block scratch, valid for the largest `lanes` seen so far.
    double* scratch(std::size_t lanes);

    // Evaluates one block and returns its top activation f^{(L)}_{k,1}.
    const double* forward_block(const double* block_w, const double* x_panel, double* acts,
                                std::size_t lanes);

    // Reverse pass for a block whose activations are in `acts`.
    // coef[s] = dLoss/d output(s). Accumulates into block_grad.
    void backward_block(const double* block_w, const double* x_panel, const double* acts,
                        const double* coef, double* block_grad, std::size_t lanes);

    // out[s] = sum_k w_out_k * f^{(L)}_{k,1}(x_s). With `cache` set, every
    // block is evaluated and its activations stored at
    // cache + k * activation_size(lanes); otherwise blocks with a zero output
    // weight are skipped.
    void forward_all(std::span<const double> weights, const double* x_panel, double* out,
                     std::size_t lanes, double* cache = nullptr);

    const kernels::LayerKernels& kernels() const { return *k_; }

private:
    Architecture arch_;
    const kernels::LayerKernels* k_;
    std::size_t per_block_;
    std::vector<std::size_t> offsets_;  // level offsets within a block, 0..L
    std::vector<double> scratch_;
    std::vector<double> delta_a_;
    std::vector<double> delta_b_;
};

}  // namespace dnnreg::detail
