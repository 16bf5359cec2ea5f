#include "block_engine.hpp"

#include <algorithm>
#include <utility>

namespace dnnreg::detail {

BlockEngine::BlockEngine(const Architecture& arch, const kernels::LayerKernels& k)
    : arch_(arch), k_(&k), per_block_(block_param_count(arch)) {
    arch_.validate();
    offsets_.resize(arch_.depth + 1);
    for (std::size_t l = 0; l <= arch_.depth; ++l) offsets_[l] = level_offset(arch_, l);
}

double* BlockEngine::scratch(std::size_t lanes) {
    if (scratch_.size() < activation_size(lanes)) scratch_.assign(activation_size(lanes), 0.0);
    return scratch_.data();
}

const double* BlockEngine::forward_block(const double* block_w, const double* x_panel,
                                         double* acts, std::size_t lanes) {
    const double* in = x_panel;
    for (std::size_t l = 0; l < arch_.depth; ++l) {
        double* out = acts + l * arch_.width * lanes;
        k_->sigmoid_layer(block_w + offsets_[l], level_rows(arch_, l), level_fan_in(arch_, l), in,
                          out, lanes);
        in = out;
    }
    return in;
}

void BlockEngine::backward_block(const double* block_w, const double* x_panel, const double* acts,
                                 const double* coef, double* block_grad, std::size_t lanes) {
    const std::size_t panel = arch_.width * lanes;
    if (delta_a_.size() < panel) {
        delta_a_.assign(panel, 0.0);
        delta_b_.assign(panel, 0.0);
    }
    const std::size_t top = arch_.depth - 1;
    const double* w_out = block_w + offsets_[arch_.depth];

    double* delta = delta_a_.data();
    double* next = delta_b_.data();
    k_->linear_layer_backward(w_out, 1, acts + top * panel, coef,
                              block_grad + offsets_[arch_.depth], delta, lanes);
    // A zero output weight makes every inner sensitivity exactly zero.
    if (*w_out == 0.0) return;

    for (std::size_t l = top + 1; l-- > 0;) {
        const double* in = l == 0 ? x_panel : acts + (l - 1) * panel;
        k_->sigmoid_layer_backward(block_w + offsets_[l], level_rows(arch_, l),
                                   level_fan_in(arch_, l), in, acts + l * panel, delta,
                                   block_grad + offsets_[l], l == 0 ? nullptr : next, lanes);
        std::swap(delta, next);
    }
}

void BlockEngine::forward_all(std::span<const double> weights, const double* x_panel, double* out,
                              std::size_t lanes, double* cache) {
    std::fill(out, out + lanes, 0.0);
    double* acts = cache != nullptr ? cache : scratch(lanes);
    for (std::size_t k = 0; k < arch_.blocks; ++k) {
        const double* block_w = weights.data() + k * per_block_;
        const double w_out = block_w[offsets_[arch_.depth]];
        if (cache != nullptr) {
            const double* top = forward_block(block_w, x_panel, acts, lanes);
            if (w_out != 0.0) k_->axpy(w_out, top, out, lanes);
            acts += activation_size(lanes);
        } else if (w_out != 0.0) {
            k_->axpy(w_out, forward_block(block_w, x_panel, acts, lanes), out, lanes);
        }
    }
}

}  // namespace dnnreg::detail
