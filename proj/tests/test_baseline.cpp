#include "dnnreg/baseline.hpp"
#include "dnnreg/errors.hpp"
#include "dnnreg/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace dnnreg;

namespace {

std::vector<double> random_vector(std::size_t n, double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// Independent evaluator: each neuron computed recursively from the flat
// layout description.
double neuron(const FcArchitecture& a, const std::vector<double>& w, std::size_t layer,
              std::size_t i, const std::vector<double>& x) {
    const std::size_t fan = layer == 0 ? a.input_dim : a.widths[layer - 1];
    const std::size_t base = fc_layer_offset(a, layer) + i * (fan + 1);
    double z = w[base];
    for (std::size_t j = 0; j < fan; ++j) {
        const double input = layer == 0 ? x[j] : neuron(a, w, layer - 1, j, x);
        z += w[base + 1 + j] * input;
    }
    return 1.0 / (1.0 + std::exp(-z));
}

double oracle(const FcArchitecture& a, const std::vector<double>& w, const std::vector<double>& x) {
    const std::size_t top = a.widths.size();
    double out = 0.0;
    for (std::size_t j = 0; j < a.widths.back(); ++j) {
        out += w[fc_layer_offset(a, top) + j] * neuron(a, w, top - 1, j, x);
    }
    return out;
}

}  // namespace

TEST(FcNet, ParamCount) {
    const FcArchitecture a{{3, 4}, 2};
    EXPECT_EQ(fc_param_count(a), 3u * 3 + 4u * 4 + 4u);
    EXPECT_EQ(fc_layer_offset(a, 1), 9u);
    EXPECT_THROW(FcArchitecture({}, 1).validate(), std::invalid_argument);
    EXPECT_THROW(FcArchitecture({3, 0}, 1).validate(), std::invalid_argument);
}

TEST(FcNet, ZeroOutputLayerGivesZero) {
    std::mt19937_64 rng(1);
    const FcArchitecture a{{5, 3, 4}, 2};
    auto w = random_vector(fc_param_count(a), 3.0, rng);
    for (std::size_t j = fc_layer_offset(a, 3); j < w.size(); ++j) w[j] = 0.0;
    const double x[2] = {0.3, -0.7};
    EXPECT_EQ(fc_forward(a, w, x), 0.0);
    EXPECT_EQ(fc_forward(a, std::vector<double>(w.size(), 0.0), x), 0.0);
}

TEST(FcNet, ForwardMatchesOracle) {
    std::mt19937_64 rng(2);
    const FcArchitecture a{{4, 3, 5}, 2};
    const auto w = random_vector(fc_param_count(a), 2.0, rng);
    for (int t = 0; t < 50; ++t) {
        const std::vector<double> x = random_vector(2, 1.0, rng);
        const double expect = oracle(a, w, x);
        EXPECT_NEAR(fc_forward(a, w, x), expect, 1e-12 * std::max(1.0, std::abs(expect)));
    }
    const double bad[1] = {0.0};
    EXPECT_THROW(fc_forward(a, w, bad), DimensionError);
}

TEST(FcNet, BatchPredictionsMatchForward) {
    std::mt19937_64 rng(3);
    const FcArchitecture a{{6, 7}, 1};
    const auto w = random_vector(fc_param_count(a), 2.0, rng);
    const auto xs = random_vector(1100, 1.0, rng);
    for (auto isa : {kernels::Isa::scalar, kernels::Isa::avx2}) {
        if (!kernels::available(isa)) continue;
        const auto p = fc_predict(a, w, xs, xs.size(), kernels::kernels_for(isa));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            ASSERT_NEAR(p[i], fc_forward(a, w, std::span<const double>(&xs[i], 1)), 1e-12);
        }
    }
}

TEST(FcNet, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(4);
    for (std::size_t instance = 0; instance < 10; ++instance) {
        const FcArchitecture a{{2 + instance % 3, 3, 1 + instance % 4}, 1 + instance % 2};
        const auto w = random_vector(fc_param_count(a), 1.5, rng);
        const std::size_t n = 3 + instance % 5;
        const Dataset data(a.input_dim, random_vector(n * a.input_dim, 1.0, rng),
                           random_vector(n, 1.0, rng));
        FcEvaluator eval(a, data, kernels::scalar_kernels());
        std::vector<double> g(w.size());
        eval.risk_and_gradient(w, g);
        auto probe = w;
        double err = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double h = 1e-5;
            probe[j] = w[j] + h;
            const double up = eval.risk(probe);
            probe[j] = w[j] - h;
            const double down = eval.risk(probe);
            probe[j] = w[j];
            err = std::max(err, std::abs(g[j] - (up - down) / (2 * h)));
            scale = std::max(scale, std::abs(g[j]));
        }
        EXPECT_LT(err / (1.0 + scale), 1e-6);
    }
}

TEST(FcNet, VectorGradientAgrees) {
    if (!kernels::available(kernels::Isa::avx2)) GTEST_SKIP();
    std::mt19937_64 rng(5);
    const FcArchitecture a{{25, 25, 25, 25}, 1};
    const auto w = random_vector(fc_param_count(a), 1.0, rng);
    const Dataset data(1, random_vector(80, 1.0, rng), random_vector(80, 1.0, rng));
    FcEvaluator s(a, data, kernels::scalar_kernels());
    FcEvaluator v(a, data, kernels::kernels_for(kernels::Isa::avx2));
    std::vector<double> gs(w.size()), gv(w.size());
    EXPECT_NEAR(s.risk_and_gradient(w, gs), v.risk_and_gradient(w, gv), 1e-13);
    for (std::size_t j = 0; j < w.size(); ++j) ASSERT_NEAR(gs[j], gv[j], 1e-12);
}

TEST(Adam, ZeroGradientKeepsWeights) {
    AdamState st(3);
    std::vector<double> w{1.0, -2.0, 0.5};
    const auto before = w;
    adam_step(st, w, std::vector<double>(3, 0.0), {});
    EXPECT_EQ(w, before);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
    AdamState st(4);
    std::vector<double> w(4, 0.0);
    const std::vector<double> g{3.0, -0.01, 250.0, -7.0};
    AdamConfig cfg;
    adam_step(st, w, g, cfg);
    for (std::size_t j = 0; j < 4; ++j) {
        // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps)
        EXPECT_NEAR(w[j], -cfg.lr * std::copysign(1.0, g[j]), cfg.lr * 1e-5);
    }
    EXPECT_THROW(adam_step(st, w, std::vector<double>(3), cfg), DimensionError);
}

TEST(Adam, QuadraticDecreasesMonotonically) {
    // f(w) = (w - 3)^2
    AdamState st(1);
    std::vector<double> w{0.0};
    AdamConfig cfg;
    cfg.lr = 0.05;
    double prev = 9.0;
    for (int t = 1; t <= 100; ++t) {
        const std::vector<double> g{2.0 * (w[0] - 3.0)};
        adam_step(st, w, g, cfg);
        const double loss = (w[0] - 3.0) * (w[0] - 3.0);
        ASSERT_TRUE(std::isfinite(loss));
        if (t > 5) {
            EXPECT_LT(loss, prev) << t;
        }
        prev = loss;
    }
}

TEST(Adam, StepBounded) {
    std::mt19937_64 rng(6);
    AdamState st(50);
    std::vector<double> w(50, 0.0);
    AdamConfig cfg;
    for (int t = 0; t < 30; ++t) {
        const auto g = random_vector(50, 1e3, rng);
        const auto before = w;
        adam_step(st, w, g, cfg);
        for (std::size_t j = 0; j < w.size(); ++j) {
            ASSERT_TRUE(std::isfinite(w[j]));
            // |m_hat| / sqrt(v_hat) <= (1 - b1) / sqrt(1 - b2) / bias factors: < 1 / sqrt(1 - b2)
            ASSERT_LE(std::abs(w[j] - before[j]), cfg.lr / std::sqrt(1.0 - cfg.beta2));
        }
    }
}

TEST(FcInit, Schemes) {
    const FcArchitecture a{{20, 20, 20, 20}, 1};
    Rng rng = substream(1, {stream::fit});
    const auto paper = fc_init(a, {InitKind::paper_style, 1000.0, 20.0}, rng);
    for (std::size_t j = 0; j < paper.size(); ++j) {
        if (j >= fc_layer_offset(a, 4)) {
            EXPECT_EQ(paper[j], 0.0);
        } else if (j < fc_layer_offset(a, 1)) {
            EXPECT_LE(std::abs(paper[j]), 1000.0);
        } else {
            EXPECT_LE(std::abs(paper[j]), 20.0);
        }
    }
    const auto glorot = fc_init(a, {InitKind::glorot_uniform}, rng);
    const double lim = std::sqrt(6.0 / 40.0);
    for (std::size_t i = 0; i < 20; ++i) {
        const std::size_t row = fc_layer_offset(a, 1) + i * 21;
        EXPECT_EQ(glorot[row], 0.0);  // bias
        for (std::size_t j = 1; j <= 20; ++j) EXPECT_LE(std::abs(glorot[row + j]), lim);
    }
    const auto he = fc_init(a, {InitKind::he_normal}, rng);
    double ss = 0.0;
    std::size_t count = 0;
    for (std::size_t j = fc_layer_offset(a, 1); j < fc_layer_offset(a, 4); ++j) {
        if ((j - fc_layer_offset(a, 1)) % 21 == 0) continue;
        ss += he[j] * he[j];
        ++count;
    }
    EXPECT_NEAR(ss / count, 2.0 / 20.0, 0.02);
    EXPECT_EQ(parse_init_kind("glorot-normal"), InitKind::glorot_normal);
    EXPECT_THROW(parse_init_kind("xavier"), std::invalid_argument);
}

TEST(Baseline, SingleCellGrid) {
    Rng rng = substream(2, {stream::data});
    const auto data = sim::generate_dataset(40, rng);
    BaselineConfig cfg;
    cfg.hidden_layers = 2;
    cfg.widths = {5};
    cfg.steps = {30};
    cfg.n_train = 30;
    cfg.n_test = 10;
    const auto fit = train_baseline(cfg, data, 11);
    ASSERT_EQ(fit.cells.size(), 1u);
    EXPECT_EQ(fit.chosen, 0u);
    EXPECT_EQ(fit.steps, 30u);
    EXPECT_EQ(fit.arch, FcArchitecture::uniform(2, 5, 1));
}

TEST(Baseline, CheckpointsMatchSeparateRuns) {
    Rng rng = substream(3, {stream::data});
    const auto data = sim::generate_dataset(40, rng);
    BaselineConfig cfg;
    cfg.hidden_layers = 2;
    cfg.widths = {4, 6};
    cfg.steps = {10, 25};
    cfg.n_train = 30;
    cfg.n_test = 10;
    const auto fit = train_baseline(cfg, data, 5);
    ASSERT_EQ(fit.cells.size(), 4u);
    // The chosen cell retrained from scratch gives the same weights.
    const auto& c = fit.cells[fit.chosen];
    const std::size_t j = c.width == 4 ? 0 : 1;
    Rng init = substream(5, {stream::grid, j});
    const auto arch = FcArchitecture::uniform(2, c.width, 1);
    const auto w = fc_train(arch, fc_init(arch, cfg.scheme, init), data.slice(0, 30), cfg.adam,
                            c.steps, {}, nullptr);
    EXPECT_EQ(w, fit.weights);
    for (const auto& cell : fit.cells) EXPECT_GE(cell.holdout_risk, c.holdout_risk);
}
