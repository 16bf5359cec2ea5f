#include "dnnreg/baseline.hpp"

#include "dnnreg/errors.hpp"
#include "dnnreg/network.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dnnreg {

void FcArchitecture::validate() const {
    if (widths.empty()) throw std::invalid_argument("need at least one hidden layer");
    if (input_dim == 0) throw std::invalid_argument("input dimension must be positive");
    for (std::size_t w : widths) {
        if (w == 0) throw std::invalid_argument("hidden layer widths must be positive");
    }
}

FcArchitecture FcArchitecture::uniform(std::size_t layers, std::size_t width,
                                       std::size_t input_dim) {
    FcArchitecture a{std::vector<std::size_t>(layers, width), input_dim};
    a.validate();
    return a;
}

namespace {

std::size_t fan_in_of(const FcArchitecture& arch, std::size_t layer) {
    return layer == 0 ? arch.input_dim : arch.widths[layer - 1];
}

}  // namespace

std::size_t fc_layer_offset(const FcArchitecture& arch, std::size_t layer) {
    if (layer > arch.widths.size()) throw std::out_of_range("layer index out of range");
    std::size_t offset = 0;
    for (std::size_t l = 0; l < layer; ++l) offset += arch.widths[l] * (fan_in_of(arch, l) + 1);
    return offset;
}

std::size_t fc_param_count(const FcArchitecture& arch) {
    arch.validate();
    return fc_layer_offset(arch, arch.widths.size()) + arch.widths.back();
}

double fc_forward(const FcArchitecture& arch, std::span<const double> weights,
                  std::span<const double> x) {
    if (weights.size() != fc_param_count(arch)) throw DimensionError("fc_forward: weight length");
    if (x.size() != arch.input_dim) throw DimensionError("fc_forward: input dimension");
    std::vector<double> in(x.begin(), x.end());
    std::vector<double> next;
    const double* w = weights.data();
    for (std::size_t l = 0; l < arch.widths.size(); ++l) {
        next.assign(arch.widths[l], 0.0);
        for (std::size_t i = 0; i < arch.widths[l]; ++i) {
            double z = *w++;
            for (double v : in) z += *w++ * v;
            next[i] = logistic(z);
        }
        std::swap(in, next);
    }
    double out = 0.0;
    for (double v : in) out += *w++ * v;
    return out;
}

FcEvaluator::FcEvaluator(FcArchitecture arch, const Dataset& data, const kernels::LayerKernels& k)
    : arch_(std::move(arch)), k_(&k) {
    arch_.validate();
    if (data.dim() != arch_.input_dim) {
        throw DimensionError("dataset has dimension " + std::to_string(data.dim()) +
                             ", network expects " + std::to_string(arch_.input_dim));
    }
    panel_ = SamplePanel::from_rows(data.xs(), data.dim(), data.size());
    const std::size_t lanes = panel_.lanes;
    ys_.assign(lanes, 0.0);
    std::copy(data.ys().begin(), data.ys().end(), ys_.begin());
    out_.assign(lanes, 0.0);
    coef_.assign(lanes, 0.0);
    std::size_t widest = 0;
    for (std::size_t w : arch_.widths) {
        acts_.emplace_back(w * lanes, 0.0);
        widest = std::max(widest, w);
    }
    delta_a_.assign(widest * lanes, 0.0);
    delta_b_.assign(widest * lanes, 0.0);
}

void FcEvaluator::forward(std::span<const double> weights) {
    if (weights.size() != fc_param_count(arch_)) throw DimensionError("weight length mismatch");
    const std::size_t lanes = panel_.lanes;
    const double* in = panel_.values.data();
    for (std::size_t l = 0; l < arch_.widths.size(); ++l) {
        k_->sigmoid_layer(weights.data() + fc_layer_offset(arch_, l), arch_.widths[l],
                          fan_in_of(arch_, l), in, acts_[l].data(), lanes);
        in = acts_[l].data();
    }
    k_->linear_layer(weights.data() + fc_layer_offset(arch_, arch_.widths.size()),
                     arch_.widths.back(), in, out_.data(), lanes);
}

double FcEvaluator::risk(std::span<const double> weights) {
    forward(weights);
    double sum = 0.0;
    for (std::size_t s = 0; s < panel_.count; ++s) {
        const double e = out_[s] - ys_[s];
        sum += e * e;
    }
    return sum / static_cast<double>(panel_.count);
}

double FcEvaluator::risk_and_gradient(std::span<const double> weights, std::span<double> grad) {
    if (grad.size() != weights.size()) throw DimensionError("gradient buffer length mismatch");
    forward(weights);
    const double n = static_cast<double>(panel_.count);
    double sum = 0.0;
    for (std::size_t s = 0; s < panel_.count; ++s) {
        const double e = out_[s] - ys_[s];
        sum += e * e;
        coef_[s] = 2.0 * e / n;
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t lanes = panel_.lanes;
    const std::size_t layers = arch_.widths.size();
    double* delta = delta_a_.data();
    double* next = delta_b_.data();
    const std::size_t out_offset = fc_layer_offset(arch_, layers);
    k_->linear_layer_backward(weights.data() + out_offset, arch_.widths.back(),
                              acts_.back().data(), coef_.data(), grad.data() + out_offset, delta,
                              lanes);
    for (std::size_t l = layers; l-- > 0;) {
        const double* in = l == 0 ? panel_.values.data() : acts_[l - 1].data();
        const std::size_t offset = fc_layer_offset(arch_, l);
        k_->sigmoid_layer_backward(weights.data() + offset, arch_.widths[l], fan_in_of(arch_, l),
                                   in, acts_[l].data(), delta, grad.data() + offset,
                                   l == 0 ? nullptr : next, lanes);
        std::swap(delta, next);
    }
    return sum / n;
}

std::vector<double> fc_predict(const FcArchitecture& arch, std::span<const double> weights,
                               std::span<const double> rows, std::size_t count,
                               const kernels::LayerKernels& k) {
    if (rows.size() != count * arch.input_dim) throw DimensionError("fc_predict: input size");
    constexpr std::size_t kChunk = 512;
    std::vector<double> result(count);
    for (std::size_t first = 0; first < count; first += kChunk) {
        const std::size_t m = std::min(kChunk, count - first);
        const auto part = rows.subspan(first * arch.input_dim, m * arch.input_dim);
        // Responses are irrelevant here; the evaluator is only used forward.
        FcEvaluator eval(arch, Dataset(arch.input_dim, {part.begin(), part.end()},
                                       std::vector<double>(m, 0.0)),
                         k);
        eval.risk(weights);
        const auto out = eval.outputs();
        std::copy_n(out.begin(), m, result.begin() + static_cast<std::ptrdiff_t>(first));
    }
    return result;
}

void AdamConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("ADAM learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("ADAM decay rates must lie in [0, 1)");
    }
    if (!(eps > 0.0)) throw std::invalid_argument("ADAM epsilon must be positive");
}

void adam_step(AdamState& state, std::span<double> weights, std::span<const double> grad,
               const AdamConfig& cfg) {
    if (weights.size() != state.m.size() || grad.size() != state.m.size()) {
        throw DimensionError("ADAM state does not match the weight vector");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double g = grad[j];
        state.m[j] = cfg.beta1 * state.m[j] + (1.0 - cfg.beta1) * g;
        state.v[j] = cfg.beta2 * state.v[j] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[j] / c1;
        const double v_hat = state.v[j] / c2;
        weights[j] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

void InitScheme::validate() const {
    if (kind == InitKind::paper_style && (!(a >= 0.0) || !(b >= 0.0))) {
        throw std::invalid_argument("initialization bounds must be non-negative");
    }
}

std::string_view to_string(InitKind kind) {
    switch (kind) {
        case InitKind::paper_style: return "paper";
        case InitKind::glorot_uniform: return "glorot-uniform";
        case InitKind::glorot_normal: return "glorot-normal";
        case InitKind::he_uniform: return "he-uniform";
        case InitKind::he_normal: return "he-normal";
    }
    return "unknown";
}

InitKind parse_init_kind(std::string_view name) {
    for (InitKind k : {InitKind::paper_style, InitKind::glorot_uniform, InitKind::glorot_normal,
                       InitKind::he_uniform, InitKind::he_normal}) {
        if (name == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown initialization scheme '" + std::string(name) + "'");
}

std::vector<double> fc_init(const FcArchitecture& arch, const InitScheme& scheme, Rng& rng) {
    scheme.validate();
    std::vector<double> w(fc_param_count(arch), 0.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto uniform = [&](double bound) {
        return bound == 0.0 ? 0.0 : -bound + 2.0 * bound * unit(rng);
    };
    const std::size_t layers = arch.widths.size();
    for (std::size_t l = 0; l <= layers; ++l) {
        const bool output = l == layers;
        const std::size_t rows = output ? 1 : arch.widths[l];
        const std::size_t fan_in = output ? arch.widths.back() : fan_in_of(arch, l);
        const std::size_t fan_out = output ? 1 : arch.widths[l];
        const std::size_t stride = output ? fan_in : fan_in + 1;
        const std::size_t first = output ? 0 : 1;  // column of the first non-bias weight
        const double fi = static_cast<double>(fan_in);
        const double fo = static_cast<double>(fan_out);
        double* layer = w.data() + fc_layer_offset(arch, l);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t c = 0; c < stride; ++c) {
                double& v = layer[i * stride + c];
                const bool bias = c < first;
                switch (scheme.kind) {
                    case InitKind::paper_style:
                        v = output ? 0.0 : uniform(l == 0 ? scheme.a : scheme.b);
                        break;
                    case InitKind::glorot_uniform:
                        v = bias ? 0.0 : uniform(std::sqrt(6.0 / (fi + fo)));
                        break;
                    case InitKind::glorot_normal:
                        v = bias ? 0.0 : std::sqrt(2.0 / (fi + fo)) * normal(rng);
                        break;
                    case InitKind::he_uniform:
                        v = bias ? 0.0 : uniform(std::sqrt(6.0 / fi));
                        break;
                    case InitKind::he_normal:
                        v = bias ? 0.0 : std::sqrt(2.0 / fi) * normal(rng);
                        break;
                }
            }
        }
    }
    return w;
}

std::vector<double> fc_train(const FcArchitecture& arch, std::vector<double> w0,
                             const Dataset& data, const AdamConfig& adam, std::size_t steps,
                             const std::vector<std::size_t>& checkpoints,
                             const std::function<void(std::size_t, std::span<const double>)>&
                                 on_checkpoint,
                             const kernels::LayerKernels& k) {
    adam.validate();
    FcEvaluator eval(arch, data, k);
    if (w0.size() != fc_param_count(arch)) throw DimensionError("starting weights length");
    AdamState state(w0.size());
    std::vector<double> grad(w0.size());
    std::size_t next = 0;
    for (std::size_t t = 0;; ++t) {
        while (next < checkpoints.size() && checkpoints[next] == t) {
            if (on_checkpoint) on_checkpoint(t, w0);
            ++next;
        }
        if (t == steps) break;
        const double risk = eval.risk_and_gradient(w0, grad);
        const double g2 = k.dot(grad.data(), grad.data(), grad.size());
        if (!std::isfinite(risk) || !std::isfinite(g2)) {
            throw DivergenceError("ADAM training diverged at step " + std::to_string(t), t);
        }
        adam_step(state, w0, grad, adam);
    }
    return w0;
}

void BaselineConfig::validate(std::size_t n) const {
    if (hidden_layers == 0) throw std::invalid_argument("need at least one hidden layer");
    if (widths.empty() || steps.empty()) throw std::invalid_argument("baseline grid is empty");
    if (!std::is_sorted(steps.begin(), steps.end()) ||
        std::adjacent_find(steps.begin(), steps.end()) != steps.end()) {
        throw std::invalid_argument("baseline step counts must be strictly increasing");
    }
    for (std::size_t w : widths) {
        if (w == 0) throw std::invalid_argument("baseline widths must be positive");
    }
    if (n_train == 0 || n_test == 0) {
        throw std::invalid_argument("training and testing parts must be non-empty");
    }
    if (n < n_train + n_test) {
        throw DimensionError("sample of size " + std::to_string(n) + " cannot be split into " +
                             std::to_string(n_train) + " + " + std::to_string(n_test));
    }
    scheme.validate();
    adam.validate();
}

std::vector<double> BaselineFit::predict(std::span<const double> rows, std::size_t count,
                                         const kernels::LayerKernels& k) const {
    auto out = fc_predict(arch, weights, rows, count, k);
    for (double& v : out) v = truncate(v, beta);
    return out;
}

BaselineFit train_baseline(const BaselineConfig& cfg, const Dataset& data, std::uint64_t seed,
                           const kernels::LayerKernels& k) {
    cfg.validate(data.size());
    const Dataset train = data.slice(0, cfg.n_train);
    const Dataset test = data.slice(cfg.n_train, cfg.n_test);
    BaselineFit fit;
    fit.beta = truncation_level(cfg.n_train, cfg.c12);
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < cfg.widths.size(); ++j) {
        const auto arch = FcArchitecture::uniform(cfg.hidden_layers, cfg.widths[j], data.dim());
        Rng rng = substream(seed, {stream::grid, j});
        auto w0 = fc_init(arch, cfg.scheme, rng);
        const std::size_t first_cell = fit.cells.size();
        try {
            fc_train(arch, std::move(w0), train, cfg.adam, cfg.steps.back(), cfg.steps,
                     [&](std::size_t step, std::span<const double> w) {
                         auto pred = fc_predict(arch, w, test.xs(), test.size(), k);
                         double sum = 0.0;
                         for (std::size_t i = 0; i < test.size(); ++i) {
                             const double e = test.y(i) - truncate(pred[i], fit.beta);
                             sum += e * e;
                         }
                         const double risk = sum / static_cast<double>(test.size());
                         fit.cells.push_back({cfg.widths[j], step, risk, false});
                         if (risk < best) {
                             best = risk;
                             any = true;
                             fit.arch = arch;
                             fit.weights.assign(w.begin(), w.end());
                             fit.steps = step;
                             fit.chosen = fit.cells.size() - 1;
                         }
                     },
                     k);
        } catch (const DivergenceError&) {
            // Keep scores reached before the failure; flag the rest.
            for (std::size_t s = fit.cells.size() - first_cell; s < cfg.steps.size(); ++s) {
                fit.cells.push_back({cfg.widths[j], cfg.steps[s],
                                     std::numeric_limits<double>::infinity(), true});
            }
        }
    }
    if (!any) throw DivergenceError("baseline training diverged for every width", 0);
    return fit;
}

}  // namespace dnnreg
