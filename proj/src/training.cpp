#include "dnnreg/training.hpp"

#include "dnnreg/errors.hpp"
#include "dnnreg/gradient.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dnnreg {

void ScheduleConfig::validate(std::size_t depth) const {
    if (t_min == 0) throw std::invalid_argument("t_min must be at least 1");
    if (!(c9 > 0.0)) throw std::invalid_argument("c9 must be positive");
    if (!(c8 > 2.0 * static_cast<double>(depth))) {
        throw std::invalid_argument("c8 must exceed twice the depth (c8 = " +
                                    detail::format_double(c8) +
                                    ", depth = " + std::to_string(depth) + ")");
    }
    if (practical_cap && *practical_cap == 0) {
        throw std::invalid_argument("practical cap must be positive");
    }
}

std::size_t ScheduleConfig::step_cap(std::size_t n, std::size_t blocks) const {
    const double k = static_cast<double>(blocks);
    const double theory = std::ceil(std::pow(std::log(static_cast<double>(n)), c8) * k * k * k);
    constexpr auto kMax = std::numeric_limits<std::size_t>::max();
    std::size_t cap = !(theory < static_cast<double>(kMax)) ? kMax
                      : theory < 1.0                        ? std::size_t{1}
                                                            : static_cast<std::size_t>(theory);
    if (practical_cap) cap = std::min(cap, *practical_cap);
    return cap;
}

double ScheduleConfig::fallback_threshold(std::size_t n, std::size_t blocks) const {
    return static_cast<double>(n) * static_cast<double>(step_cap(n, blocks));
}

std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::conditions_met: return "conditions_met";
        case StopReason::fallback_cap: return "fallback_cap";
    }
    return "unknown";
}

std::string_view to_string(ExitReason r) {
    switch (r) {
        case ExitReason::step_budget: return "step_budget";
        case ExitReason::gradient_budget: return "gradient_budget";
        case ExitReason::distance: return "distance";
    }
    return "unknown";
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

// Gradient descent from a fixed start, one record per iterate.
class Descent {
public:
    Descent(RiskEvaluator& eval, const WeightVector& w0, double lambda, std::size_t attempt,
            const kernels::LayerKernels& k)
        : eval_(eval), k_(k), start_(w0), w_(w0), grad_(w0.size()), lambda_(lambda),
          attempt_(attempt) {
        record();
    }

    // Takes one step and records the new iterate.
    void step() {
        k_.axpy(-lambda_, grad_.data(), w_.values().data(), w_.size());
        record();
    }

    const TraceRecord& last() const { return trace_.back(); }
    std::size_t t() const { return trace_.size() - 1; }
    std::vector<TraceRecord>& trace() { return trace_; }
    WeightVector& weights() { return w_; }

private:
    void record() {
        const std::size_t t = trace_.size();
        const double risk = eval_.risk_and_gradient(w_.values(), grad_);
        const double g2 = k_.dot(grad_.data(), grad_.data(), grad_.size());
        if (!std::isfinite(risk) || !std::isfinite(g2)) {
            throw DivergenceError("gradient descent diverged at step " + std::to_string(t) +
                                      " (lambda = " + detail::format_double(lambda_) + ")",
                                  t);
        }
        const double dist = std::sqrt(squared_distance(w_.values(), start_.values()));
        trace_.push_back(TraceRecord{attempt_, t, risk, g2, dist});
    }

    RiskEvaluator& eval_;
    const kernels::LayerKernels& k_;
    const WeightVector& start_;
    WeightVector w_;
    std::vector<double> grad_;
    double lambda_;
    std::size_t attempt_;
    std::vector<TraceRecord> trace_;
};

}  // namespace

ScheduleOutcome gd_run(const WeightVector& w0, const Dataset& data, double lambda,
                       std::size_t steps, const kernels::LayerKernels& k) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("stepsize must be positive and finite");
    }
    if (steps == 0) throw std::invalid_argument("gd_run needs at least one step");
    RiskEvaluator eval(w0.arch(), data, k);
    Descent gd(eval, w0, lambda, 0, k);
    while (gd.t() < steps) gd.step();

    ScheduleOutcome out;
    out.weights = std::move(gd.weights());
    out.lambda = lambda;
    out.steps = steps;
    out.doubling_index = 0;
    out.stop_reason = StopReason::fallback_cap;
    out.trace = std::move(gd.trace());
    out.history = out.trace;
    out.attempts.push_back(AttemptSummary{0, lambda, steps, steps, ExitReason::step_budget, false});
    return out;
}

ConditionCheck check_conditions(std::span<const TraceRecord> trace, double lambda, std::size_t t,
                                std::size_t n, double c9) {
    if (t == 0) throw std::invalid_argument("stopping conditions are undefined at t = 0");
    if (trace.size() < t + 1) {
        throw std::invalid_argument("trace holds " + std::to_string(trace.size()) +
                                    " records, conditions at t = " + std::to_string(t) +
                                    " need " + std::to_string(t + 1));
    }
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    const double nn = static_cast<double>(n);
    const double tt = static_cast<double>(t);
    double grad_sum = 0.0;
    double risk_sum = 0.0;
    for (std::size_t s = 0; s < t; ++s) {
        grad_sum += lambda * trace[s].grad_norm_sq;
        risk_sum += trace[s].risk;
    }
    double max_dist_sq = 0.0;
    for (std::size_t s = 1; s <= t; ++s) {
        max_dist_sq = std::max(max_dist_sq, trace[s].dist_from_init * trace[s].dist_from_init);
    }
    ConditionCheck c;
    c.gradient_budget = grad_sum / tt <= c9 / nn;
    c.risk_decrease = trace[t].risk <= risk_sum / tt + c9 / nn;
    c.distance = max_dist_sq <= c9 * std::log(nn) / nn;
    return c;
}

ScheduleOutcome adaptive_fit(const Architecture& arch, const InitBounds& bounds,
                             const Dataset& data, const ScheduleConfig& cfg, std::uint64_t seed,
                             const kernels::LayerKernels& k) {
    arch.validate();
    bounds.validate();
    cfg.validate(arch.depth);
    const std::size_t n = data.size();
    if (n < 2) throw DataError("adaptive fit needs at least two samples");

    const double nn = static_cast<double>(n);
    const std::size_t cap1 = cfg.step_cap(n, arch.blocks);
    const double cap2 = cfg.fallback_threshold(n, arch.blocks);
    const double grad_budget = cfg.c9 / nn;
    const double dist_bound = std::sqrt(cfg.c9 * std::log(nn) / nn);

    RiskEvaluator eval(arch, data, k);
    ScheduleOutcome out;
    for (std::size_t i = 0;; ++i) {
        const double planned = std::ldexp(static_cast<double>(cfg.t_min), static_cast<int>(i));
        const double lambda = 1.0 / planned;
        const std::size_t target =
            planned >= static_cast<double>(cap1) ? cap1 : static_cast<std::size_t>(planned);

        Rng rng = substream(seed, {stream::attempt, i});
        const WeightVector w0 = init_weights(arch, bounds, rng);
        Descent gd(eval, w0, lambda, i, k);

        ExitReason exit = ExitReason::step_budget;
        double running = 0.0;  // sum over s < t of lambda |grad(w^(s))|^2
        while (true) {
            if (gd.t() >= target) break;
            if (running / planned > grad_budget) {
                exit = ExitReason::gradient_budget;
                break;
            }
            if (gd.last().dist_from_init > dist_bound) {
                exit = ExitReason::distance;
                break;
            }
            running += lambda * gd.last().grad_norm_sq;
            gd.step();
        }

        const std::size_t reached = gd.t();
        const bool met = reached > 0 &&
                         check_conditions(gd.trace(), lambda, reached, n, cfg.c9).all();
        out.attempts.push_back(AttemptSummary{i, lambda, target, reached, exit, met});
        const bool fallback = !met && planned >= cap2;
        if (met || fallback) {
            // The fallback estimate always runs the full t_n steps.
            while (gd.t() < target) gd.step();
            out.history.insert(out.history.end(), gd.trace().begin(), gd.trace().end());
            out.weights = std::move(gd.weights());
            out.lambda = lambda;
            out.steps = target;
            out.doubling_index = i;
            out.stop_reason = met ? StopReason::conditions_met : StopReason::fallback_cap;
            out.trace = std::move(gd.trace());
            return out;
        }
        out.history.insert(out.history.end(), gd.trace().begin(), gd.trace().end());
    }
}

void write_trace_csv(std::ostream& os, std::span<const TraceRecord> records) {
    os << "i,t,risk,grad_norm_sq,dist_from_init\n";
    for (const auto& r : records) {
        os << r.attempt << ',' << r.step << ',' << detail::format_double(r.risk) << ','
           << detail::format_double(r.grad_norm_sq) << ','
           << detail::format_double(r.dist_from_init) << '\n';
    }
}

}  // namespace dnnreg
