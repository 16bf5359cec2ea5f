#pragma once

#include "dnnreg/dataset.hpp"
#include "dnnreg/kernels.hpp"
#include "dnnreg/network.hpp"
#include "dnnreg/random.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace dnnreg {

/// Constants of the data-dependent stepsize / step-count rule.
struct ScheduleConfig {
    std::size_t t_min = 50;
    double c8 = 9.0;   // exponent of ln(n) in the step cap, must exceed 2L
    double c9 = 10.0;  // budget constant of the stopping conditions
    /// Upper bound applied to ceil(ln(n)^c8 * K^3); nullopt disables it.
    std::optional<std::size_t> practical_cap = 100000;

    /// Throws std::invalid_argument for t_min == 0, c9 <= 0 or c8 <= 2 * depth.
    void validate(std::size_t depth) const;

    /// Step cap t_max,1 = min(ceil(ln(n)^c8 * K^3), practical_cap).
    std::size_t step_cap(std::size_t n, std::size_t blocks) const;

    /// Fallback threshold t_max,2 = n * step_cap.
    double fallback_threshold(std::size_t n, std::size_t blocks) const;
};

enum class StopReason { conditions_met, fallback_cap };

/// Why an inner gradient-descent run ended.
enum class ExitReason {
    step_budget,      // reached min(2^i t_min, cap)
    gradient_budget,  // running sum of lambda |grad|^2 exceeded the C1 budget
    distance,         // moved further from the start than C3 allows
};

std::string_view to_string(StopReason r);
std::string_view to_string(ExitReason r);

/// State of one gradient-descent iterate w^(t).
struct TraceRecord {
    std::size_t attempt = 0;     // doubling index i
    std::size_t step = 0;        // t
    double risk = 0.0;           // F_n(w^(t))
    double grad_norm_sq = 0.0;   // |grad F_n(w^(t))|^2
    double dist_from_init = 0.0; // |w^(t) - w^(0)|
};

/// Summary of one doubling index of the adaptive rule.
struct AttemptSummary {
    std::size_t attempt = 0;
    double lambda = 0.0;
    std::size_t target_steps = 0;
    std::size_t steps = 0;
    ExitReason exit = ExitReason::step_budget;
    bool conditions_met = false;
};

struct ScheduleOutcome {
    WeightVector weights;
    double lambda = 0.0;
    std::size_t steps = 0;           // t_n
    std::size_t doubling_index = 0;  // i
    StopReason stop_reason = StopReason::fallback_cap;
    /// Iterates 0..steps of the accepted run.
    std::vector<TraceRecord> trace;
    /// Every iterate of every attempt, in order.
    std::vector<TraceRecord> history;
    std::vector<AttemptSummary> attempts;
};

/// `steps` plain gradient-descent steps w <- w - lambda grad F_n(w) from w0.
/// Throws DivergenceError on a non-finite risk or gradient.
ScheduleOutcome gd_run(const WeightVector& w0, const Dataset& data, double lambda,
                       std::size_t steps, const kernels::LayerKernels& k = kernels::active());

struct ConditionCheck {
    bool gradient_budget = false;  // C1
    bool risk_decrease = false;    // C2
    bool distance = false;         // C3

    bool all() const { return gradient_budget && risk_decrease && distance; }
};

/// Stopping conditions evaluated at step t of `trace` (records 0..t, with
/// record s describing w^(s)):
///   C1: (1/t) sum_{s<t} lambda |grad F_n(w^(s))|^2 <= c9/n
///   C2: F_n(w^(t)) <= (1/t) sum_{s<t} F_n(w^(s)) + c9/n
///   C3: max_{1<=s<=t} |w^(0) - w^(s)|^2 <= c9 ln(n)/n
/// Throws std::invalid_argument for t == 0 or a trace shorter than t+1.
ConditionCheck check_conditions(std::span<const TraceRecord> trace, double lambda, std::size_t t,
                                std::size_t n, double c9);

/// Doubling search over lambda = 1/(2^i t_min) with a fresh initialization
/// per index i (drawn from substream(seed, {attempt, i})); stops at the first
/// i whose run satisfies C1-C3, or falls back once 2^i t_min reaches the
/// fallback threshold.
ScheduleOutcome adaptive_fit(const Architecture& arch, const InitBounds& bounds,
                             const Dataset& data, const ScheduleConfig& cfg, std::uint64_t seed,
                             const kernels::LayerKernels& k = kernels::active());

/// CSV with columns i,t,risk,grad_norm_sq,dist_from_init, one row per record.
void write_trace_csv(std::ostream& os, std::span<const TraceRecord> records);

}  // namespace dnnreg
