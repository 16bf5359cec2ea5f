#include "dnnreg/errors.hpp"
#include "dnnreg/gradient.hpp"
#include "dnnreg/training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace dnnreg;

namespace {

Dataset noisy_sine(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> e(0.0, 0.1);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = u(rng);
        ys[i] = 1.0 + std::sin(3.0 * xs[i]) + e(rng);
    }
    return Dataset(1, std::move(xs), std::move(ys));
}

// K = 1, L = 2, r = 1 with a level-0 bias so large that every logistic
// unit returns exactly 1. All inner sensitivities vanish and the risk is
// the parabola (1/n) sum (w_out - y_i)^2 in the output weight alone.
WeightVector saturated_unit(double w_out) {
    WeightVector w({1, 2, 1, 1});
    w.at({0, 0, 0, 0}) = 60.0;
    w.at({0, 1, 0, 0}) = 60.0;
    w.at({0, 2, 0, 1}) = w_out;
    return w;
}

std::vector<TraceRecord> flat_trace(std::size_t len, double risk, double g2, double dist) {
    std::vector<TraceRecord> t(len);
    for (std::size_t s = 0; s < len; ++s) t[s] = {0, s, risk, g2, s == 0 ? 0.0 : dist};
    return t;
}

}  // namespace

TEST(ScheduleConfig, Validation) {
    ScheduleConfig cfg;
    EXPECT_NO_THROW(cfg.validate(4));
    EXPECT_THROW(cfg.validate(5), std::invalid_argument);
    cfg.t_min = 0;
    EXPECT_THROW(cfg.validate(2), std::invalid_argument);
    cfg = {};
    cfg.c9 = 0.0;
    EXPECT_THROW(cfg.validate(2), std::invalid_argument);
}

TEST(ScheduleConfig, Caps) {
    ScheduleConfig cfg;
    EXPECT_EQ(cfg.step_cap(100, 800), 100000u);
    EXPECT_EQ(cfg.fallback_threshold(100, 800), 1e7);
    cfg.practical_cap.reset();
    cfg.c8 = 1.0;
    // ceil(ln(10) * 2^3)
    EXPECT_EQ(cfg.step_cap(10, 2), static_cast<std::size_t>(std::ceil(std::log(10.0) * 8.0)));
    cfg.c8 = 9.0;
    EXPECT_EQ(cfg.step_cap(100, 800),
              static_cast<std::size_t>(std::ceil(std::pow(std::log(100.0), 9.0) * 512e6)));
}

TEST(GdRun, ZeroResponsesLeaveWeightsUnchanged) {
    const Architecture arch{3, 4, 4, 1};
    Rng rng = substream(1, {stream::fit});
    const auto w0 = init_weights(arch, {1000.0, 20.0}, rng);
    const Dataset data(1, {-0.5, 0.0, 0.3, 0.9}, {0.0, 0.0, 0.0, 0.0});
    const auto out = gd_run(w0, data, 0.1, 25);
    EXPECT_EQ(out.weights, w0);
    EXPECT_EQ(out.trace.size(), 26u);
    EXPECT_EQ(out.stop_reason, StopReason::fallback_cap);
}

TEST(GdRun, FirstStepMovesOnlyOuterWeights) {
    const Architecture arch{4, 3, 3, 1};
    Rng rng = substream(2, {stream::fit});
    const auto w0 = init_weights(arch, {10.0, 3.0}, rng);
    const auto data = noisy_sine(12, 3);
    const double lambda = 0.05;
    const auto out = gd_run(w0, data, lambda, 1);
    const double n = static_cast<double>(data.size());
    for (std::size_t f = 0; f < w0.size(); ++f) {
        const auto idx = locate(arch, f);
        if (idx.level != arch.depth) {
            EXPECT_EQ(out.weights[f], w0[f]);
            continue;
        }
        WeightVector probe(arch, std::vector<double>(w0.values().begin(), w0.values().end()));
        probe[f] = 1.0;
        double g = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            g += 2.0 / n * (0.0 - data.y(i)) * forward(probe, data.x(i));
        }
        EXPECT_NEAR(out.weights[f], -lambda * g, 1e-14);
    }
}

TEST(GdRun, ParabolaContractsGeometrically) {
    const Dataset data(1, {-0.2, 0.1, 0.7}, {1.0, 2.0, 4.5});
    const double mean = 2.5;
    const double lambda = 0.1;
    const auto out = gd_run(saturated_unit(0.0), data, lambda, 30);
    for (const auto& rec : out.trace) {
        const double w = mean + std::pow(1.0 - 2.0 * lambda, rec.step) * (0.0 - mean);
        EXPECT_NEAR(std::abs(w), rec.dist_from_init, 1e-12);
    }
    const double w30 = mean - std::pow(0.8, 30) * mean;
    EXPECT_NEAR(out.weights.outer(0), w30, 1e-12);
}

TEST(GdRun, DivergenceIsReported) {
    const Dataset data(1, {0.0, 0.5}, {1.0, -1.0});
    try {
        gd_run(saturated_unit(0.5), data, 10.0, 1000);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.step(), 0u);
        EXPECT_LT(e.step(), 1000u);
    }
    EXPECT_THROW(gd_run(saturated_unit(0.5), data, 0.0, 3), std::invalid_argument);
    EXPECT_THROW(gd_run(saturated_unit(0.5), data, 0.1, 0), std::invalid_argument);
}

TEST(Conditions, ConstantTraceSatisfiesAll) {
    const auto trace = flat_trace(11, 0.3, 0.0, 0.0);
    for (std::size_t t = 1; t <= 10; ++t) EXPECT_TRUE(check_conditions(trace, 0.02, t, 100, 10.0).all());
    EXPECT_THROW(check_conditions(trace, 0.02, 0, 100, 10.0), std::invalid_argument);
    EXPECT_THROW(check_conditions(trace, 0.02, 11, 100, 10.0), std::invalid_argument);
}

TEST(Conditions, Thresholds) {
    // c9 / n = 0.1 and c9 ln(100) / 100 = 0.4605...
    const double lambda = 0.5;
    auto trace = flat_trace(5, 1.0, 0.0, 0.0);
    const std::size_t t = 4;

    trace[0].grad_norm_sq = 0.1 * 4 / lambda * 0.999;
    EXPECT_TRUE(check_conditions(trace, lambda, t, 100, 10.0).gradient_budget);
    trace[0].grad_norm_sq = 0.1 * 4 / lambda * 1.001;
    EXPECT_FALSE(check_conditions(trace, lambda, t, 100, 10.0).gradient_budget);

    const double bound = std::sqrt(10.0 * std::log(100.0) / 100.0);
    EXPECT_NEAR(bound * bound, 0.4605170186, 1e-9);
    trace[2].dist_from_init = bound * 0.999;
    EXPECT_TRUE(check_conditions(trace, lambda, t, 100, 10.0).distance);
    trace[2].dist_from_init = bound * 1.001;
    EXPECT_FALSE(check_conditions(trace, lambda, t, 100, 10.0).distance);
    // the starting point's record is never part of the maximum
    trace[2].dist_from_init = 0.0;
    trace[0].dist_from_init = 10.0;
    EXPECT_TRUE(check_conditions(trace, lambda, t, 100, 10.0).distance);

    trace[4].risk = 1.0 + 0.1 * 0.999;
    EXPECT_TRUE(check_conditions(trace, lambda, t, 100, 10.0).risk_decrease);
    trace[4].risk = 1.0 + 0.1 * 1.001;
    EXPECT_FALSE(check_conditions(trace, lambda, t, 100, 10.0).risk_decrease);
}

TEST(Conditions, SingleLargeGradientBreaksBudget) {
    const std::size_t n = 100, t = 8;
    const double lambda = 0.01, c9 = 10.0;
    auto trace = flat_trace(t + 1, 0.5, 0.0, 0.0);
    trace[3].grad_norm_sq = 100.0 * c9 / (n * lambda * t);
    const auto c = check_conditions(trace, lambda, t, n, c9);
    EXPECT_FALSE(c.gradient_budget);
    EXPECT_TRUE(c.risk_decrease);
    EXPECT_TRUE(c.distance);
}

TEST(AdaptiveFit, ZeroResponsesStopImmediately) {
    const Architecture arch{5, 4, 8, 1};
    const Dataset data(1, {-0.9, -0.1, 0.4, 0.8, 0.2}, std::vector<double>(5, 0.0));
    const auto out = adaptive_fit(arch, {1000.0, 20.0}, data, {}, 17);
    EXPECT_EQ(out.doubling_index, 0u);
    EXPECT_EQ(out.steps, 50u);
    EXPECT_DOUBLE_EQ(out.lambda, 1.0 / 50.0);
    EXPECT_EQ(out.stop_reason, StopReason::conditions_met);
    Rng rng = substream(17, {stream::attempt, 0});
    EXPECT_EQ(out.weights, init_weights(arch, {1000.0, 20.0}, rng));
}

TEST(AdaptiveFit, InvariantsOnNoisyData) {
    const Architecture arch{8, 3, 3, 1};
    const auto data = noisy_sine(30, 7);
    ScheduleConfig cfg;
    cfg.t_min = 4;
    cfg.c9 = 5.0;
    const auto out = adaptive_fit(arch, {10.0, 2.0}, data, cfg, 99);

    EXPECT_DOUBLE_EQ(out.lambda, 1.0 / std::ldexp(4.0, static_cast<int>(out.doubling_index)));
    EXPECT_LE(out.lambda * static_cast<double>(out.steps), 1.0 + 1e-15);
    EXPECT_LE(out.steps, cfg.step_cap(data.size(), arch.blocks));
    ASSERT_EQ(out.trace.size(), out.steps + 1);
    ASSERT_EQ(out.attempts.size(), out.doubling_index + 1);
    // this configuration rejects a few doubling indices first
    EXPECT_GE(out.attempts.size(), 3u);
    if (out.stop_reason == StopReason::conditions_met) {
        EXPECT_TRUE(check_conditions(out.trace, out.lambda, out.steps, data.size(), cfg.c9).all());
    }

    // Replay every rejected attempt: an early exit must rule out C1-C3 at the
    // planned step count.
    const double n = static_cast<double>(data.size());
    for (const auto& a : out.attempts) {
        std::vector<TraceRecord> rec;
        for (const auto& r : out.history) {
            if (r.attempt == a.attempt) rec.push_back(r);
        }
        if (a.attempt != out.doubling_index) {
            ASSERT_EQ(rec.size(), a.steps + 1);
        }
        const double planned = 1.0 / a.lambda;
        if (a.exit == ExitReason::gradient_budget) {
            double sum = 0.0;
            for (std::size_t s = 0; s < a.steps; ++s) sum += a.lambda * rec[s].grad_norm_sq;
            EXPECT_GT(sum / planned, cfg.c9 / n);
        }
        if (a.exit == ExitReason::distance) {
            EXPECT_GT(rec[a.steps].dist_from_init * rec[a.steps].dist_from_init,
                      cfg.c9 * std::log(n) / n);
        }
        if (a.exit != ExitReason::step_budget) {
            EXPECT_FALSE(a.conditions_met);
        }
        EXPECT_EQ(a.conditions_met, a.attempt == out.doubling_index &&
                                        out.stop_reason == StopReason::conditions_met);
    }
}

TEST(AdaptiveFit, Deterministic) {
    const Architecture arch{6, 3, 2, 1};
    const auto data = noisy_sine(20, 1);
    ScheduleConfig cfg;
    cfg.t_min = 8;
    const auto a = adaptive_fit(arch, {5.0, 2.0}, data, cfg, 5);
    const auto b = adaptive_fit(arch, {5.0, 2.0}, data, cfg, 5);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.steps, b.steps);
    if (kernels::available(kernels::Isa::avx2)) {
        const auto c = adaptive_fit(arch, {5.0, 2.0}, data, cfg, 5, kernels::scalar_kernels());
        EXPECT_EQ(a.steps, c.steps);
        EXPECT_EQ(a.doubling_index, c.doubling_index);
    }
}

TEST(AdaptiveFit, FallbackRunsFullSchedule) {
    // A tiny cap forces the fallback after a few doublings.
    const Architecture arch{4, 2, 2, 1};
    const auto data = noisy_sine(10, 2);
    ScheduleConfig cfg;
    cfg.t_min = 1;
    cfg.c9 = 1e-6;
    cfg.practical_cap = 2;
    const auto out = adaptive_fit(arch, {5.0, 2.0}, data, cfg, 3);
    EXPECT_EQ(out.stop_reason, StopReason::fallback_cap);
    EXPECT_EQ(out.steps, 2u);
    EXPECT_EQ(out.trace.size(), 3u);
    EXPECT_GE(std::ldexp(1.0, static_cast<int>(out.doubling_index)), 20.0);
}

TEST(Trace, CsvLayout) {
    std::ostringstream os;
    const std::vector<TraceRecord> recs{{0, 0, 1.5, 0.25, 0.0}, {2, 7, 0.1, 1e-20, 3.0}};
    write_trace_csv(os, recs);
    EXPECT_EQ(os.str(), "i,t,risk,grad_norm_sq,dist_from_init\n0,0,1.5,0.25,0\n2,7,0.1,1e-20,3\n");
}
