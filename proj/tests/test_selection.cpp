#include "dnnreg/errors.hpp"
#include "dnnreg/selection.hpp"
#include "dnnreg/simulation.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace dnnreg;

namespace {

Dataset sample(std::size_t n, std::uint64_t seed) {
    Rng rng = substream(seed, {stream::data});
    return sim::generate_dataset(n, rng);
}

ScheduleConfig quick_schedule() {
    ScheduleConfig cfg;
    cfg.t_min = 8;
    return cfg;
}

}  // namespace

TEST(Selection, Validation) {
    SplitSpec spec{8, 2, {}};
    EXPECT_THROW(spec.validate(10), std::invalid_argument);
    spec.grid = {{1.0, 1.0}};
    EXPECT_NO_THROW(spec.validate(10));
    EXPECT_THROW(spec.validate(9), DimensionError);
    spec.n_test = 0;
    EXPECT_THROW(spec.validate(10), std::invalid_argument);
}

TEST(Selection, GridOrder) {
    const auto g = bounds_grid({10, 100}, {20, 200, 2000});
    ASSERT_EQ(g.size(), 6u);
    EXPECT_EQ(g[0], (InitBounds{10, 20}));
    EXPECT_EQ(g[2], (InitBounds{10, 2000}));
    EXPECT_EQ(g[3], (InitBounds{100, 20}));
}

TEST(Selection, SingleCandidate) {
    const auto data = sample(30, 1);
    const Architecture arch{6, 3, 3, 1};
    const SplitSpec spec{24, 6, {{50.0, 5.0}}};
    const auto r = split_select(arch, data, spec, quick_schedule(), 3);
    EXPECT_EQ(r.chosen_index, 0u);
    EXPECT_EQ(r.chosen, (InitBounds{50.0, 5.0}));
    ASSERT_EQ(r.holdout_risks.size(), 1u);
}

TEST(Selection, ChoosesFirstMinimizer) {
    const auto data = sample(30, 2);
    const Architecture arch{6, 3, 3, 1};
    // Zero bounds make every candidate's fit identical, so ties break by order.
    const SplitSpec tie{24, 6, {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}};
    const auto r = split_select(arch, data, tie, quick_schedule(), 4);
    EXPECT_EQ(r.chosen_index, 0u);
    EXPECT_EQ(r.holdout_risks[0], r.holdout_risks[2]);

    const SplitSpec spec{24, 6, bounds_grid({1.0, 100.0}, {0.5, 20.0})};
    const auto s = split_select(arch, data, spec, quick_schedule(), 4);
    ASSERT_EQ(s.holdout_risks.size(), 4u);
    const auto best = std::min_element(s.holdout_risks.begin(), s.holdout_risks.end());
    EXPECT_EQ(s.chosen_index, static_cast<std::size_t>(best - s.holdout_risks.begin()));
    EXPECT_EQ(s.chosen, spec.grid[s.chosen_index]);
}

TEST(Selection, TestPartOnlyAffectsScores) {
    const auto data = sample(30, 5);
    const Architecture arch{6, 3, 3, 1};
    const SplitSpec spec{24, 6, bounds_grid({1.0, 100.0}, {0.5, 20.0})};
    std::vector<double> ys(data.ys().begin(), data.ys().end());
    std::reverse(ys.begin() + 24, ys.end());
    for (std::size_t i = 24; i < 30; ++i) ys[i] += 0.3;
    const auto permuted = data.with_responses(ys);

    const auto a = split_select(arch, data, spec, quick_schedule(), 6);
    const auto b = split_select(arch, permuted, spec, quick_schedule(), 6);
    EXPECT_NE(a.holdout_risks, b.holdout_risks);
    if (a.chosen_index == b.chosen_index) {
        EXPECT_EQ(a.model.weights, b.model.weights);
    }
    // The returned model is the one fitted on the training part alone.
    const Dataset train = data.slice(0, 24);
    Rng cell = substream(6, {stream::grid, a.chosen_index});
    const auto refit = adaptive_fit(arch, a.chosen, train, quick_schedule(), cell());
    EXPECT_EQ(refit.weights, a.model.weights);
}

TEST(Selection, HoldoutRiskTruncates) {
    WeightVector w({1, 2, 1, 1});
    w.at({0, 0, 0, 0}) = 60.0;
    w.at({0, 1, 0, 0}) = 60.0;
    w.at({0, 2, 0, 1}) = 100.0;  // predicts 100 everywhere
    const Dataset d(1, {0.0, 0.5}, {1.0, 3.0});
    EXPECT_DOUBLE_EQ(holdout_risk(w, d, 2.0), (1.0 + 1.0) / 2.0);
}
