#include "dnnreg/kernels.hpp"
#include "dnnreg/network.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace dnnreg;
using namespace dnnreg::kernels;

namespace {

std::vector<double> uniform(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

class VectorKernels : public ::testing::Test {
protected:
    void SetUp() override {
        if (avx2_kernels() == nullptr) GTEST_SKIP() << "AVX2 not available on this machine";
        vec = avx2_kernels();
    }
    const LayerKernels& ref = scalar_kernels();
    const LayerKernels* vec = nullptr;
};

}  // namespace

TEST(Kernels, PaddedLanes) {
    EXPECT_EQ(padded_lanes(0), 0u);
    EXPECT_EQ(padded_lanes(1), 8u);
    EXPECT_EQ(padded_lanes(8), 8u);
    EXPECT_EQ(padded_lanes(9), 16u);
}

TEST(Kernels, ParseIsa) {
    EXPECT_EQ(parse_isa("scalar"), Isa::scalar);
    EXPECT_EQ(parse_isa("avx2"), Isa::avx2);
    EXPECT_EQ(parse_isa("auto"), best_available());
    EXPECT_THROW(parse_isa("neon"), std::invalid_argument);
    EXPECT_TRUE(available(Isa::scalar));
    EXPECT_EQ(&kernels_for(Isa::scalar), &scalar_kernels());
}

TEST(Kernels, ScalarLogisticMatchesDefinition) {
    for (double z : {-800.0, -40.0, -3.0, -1e-9, 0.0, 1e-9, 2.5, 36.0, 40.0, 800.0}) {
        const double expect = 1.0 / (1.0 + std::exp(-z));
        EXPECT_NEAR(logistic(z), expect, 1e-16) << z;
    }
    EXPECT_EQ(logistic(0.0), 0.5);
}

TEST_F(VectorKernels, SigmoidAgreesWithReference) {
    std::mt19937_64 rng(11);
    std::vector<double> z = uniform(4096, -60.0, 60.0, rng);
    const auto wide = uniform(1024, -900.0, 900.0, rng);
    z.insert(z.end(), wide.begin(), wide.end());
    for (double edge : {-708.5, -708.39, -708.0, -745.2, -37.0, 36.99, 37.0, 37.01, 0.0, -0.0,
                        1e-300, -1e-300, 700.0, 710.0}) {
        z.push_back(edge);
    }
    z.resize(padded_lanes(z.size()), 0.25);
    std::vector<double> a(z.size()), b(z.size());
    ref.sigmoid(z.data(), a.data(), z.size());
    vec->sigmoid(z.data(), b.data(), z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double tol = 4 * std::numeric_limits<double>::epsilon() * a[i] + 1e-300;
        ASSERT_NEAR(a[i], b[i], tol) << "z = " << z[i];
        ASSERT_GE(b[i], 0.0);
        ASSERT_LE(b[i], 1.0);
    }
}

TEST_F(VectorKernels, SigmoidSaturatesExactly) {
    std::vector<double> z{-1e4, -800.0, 40.0, 1e4, 37.5, 800.0, -710.0, 1e300};
    std::vector<double> out(z.size());
    vec->sigmoid(z.data(), out.data(), z.size());
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[1], 0.0);
    EXPECT_EQ(out[2], 1.0);
    EXPECT_EQ(out[3], 1.0);
    EXPECT_EQ(out[4], 1.0);
    EXPECT_EQ(out[5], 1.0);
    EXPECT_EQ(out[6], 0.0);
    EXPECT_EQ(out[7], 1.0);
}

TEST_F(VectorKernels, SigmoidLayerAgrees) {
    std::mt19937_64 rng(3);
    for (std::size_t rows : {1u, 3u, 8u}) {
        for (std::size_t fan : {1u, 2u, 8u}) {
            const std::size_t lanes = 24;
            const auto w = uniform(rows * (fan + 1), -20.0, 20.0, rng);
            const auto in = uniform(fan * lanes, -1.0, 1.0, rng);
            std::vector<double> a(rows * lanes), b(rows * lanes);
            ref.sigmoid_layer(w.data(), rows, fan, in.data(), a.data(), lanes);
            vec->sigmoid_layer(w.data(), rows, fan, in.data(), b.data(), lanes);
            EXPECT_LT(max_abs_diff(a, b), 1e-14) << rows << "x" << fan;
        }
    }
}

TEST_F(VectorKernels, SigmoidLayerBackwardAgrees) {
    std::mt19937_64 rng(5);
    for (std::size_t rows : {1u, 4u, 8u}) {
        for (std::size_t fan : {1u, 3u, 8u}) {
            const std::size_t lanes = 32;
            const auto w = uniform(rows * (fan + 1), -3.0, 3.0, rng);
            const auto in = uniform(fan * lanes, -1.0, 1.0, rng);
            std::vector<double> act(rows * lanes);
            ref.sigmoid_layer(w.data(), rows, fan, in.data(), act.data(), lanes);
            const auto delta0 = uniform(rows * lanes, -1.0, 1.0, rng);

            auto da = delta0, db = delta0;
            std::vector<double> ga(rows * (fan + 1), 0.5), gb(ga);
            std::vector<double> ia(fan * lanes), ib(fan * lanes);
            ref.sigmoid_layer_backward(w.data(), rows, fan, in.data(), act.data(), da.data(),
                                       ga.data(), ia.data(), lanes);
            vec->sigmoid_layer_backward(w.data(), rows, fan, in.data(), act.data(), db.data(),
                                        gb.data(), ib.data(), lanes);
            EXPECT_LT(max_abs_diff(da, db), 1e-15);
            EXPECT_LT(max_abs_diff(ga, gb), 1e-13);
            EXPECT_LT(max_abs_diff(ia, ib), 1e-14);
        }
    }
}

TEST_F(VectorKernels, LinearKernelsAgree) {
    std::mt19937_64 rng(9);
    const std::size_t fan = 5, lanes = 40;
    const auto w = uniform(fan, -2.0, 2.0, rng);
    const auto in = uniform(fan * lanes, -1.0, 1.0, rng);
    const auto coef = uniform(lanes, -1.0, 1.0, rng);
    std::vector<double> a(lanes), b(lanes);
    ref.linear_layer(w.data(), fan, in.data(), a.data(), lanes);
    vec->linear_layer(w.data(), fan, in.data(), b.data(), lanes);
    EXPECT_LT(max_abs_diff(a, b), 1e-14);

    std::vector<double> ga(fan, 0.0), gb(fan, 0.0), ia(fan * lanes), ib(fan * lanes);
    ref.linear_layer_backward(w.data(), fan, in.data(), coef.data(), ga.data(), ia.data(), lanes);
    vec->linear_layer_backward(w.data(), fan, in.data(), coef.data(), gb.data(), ib.data(), lanes);
    EXPECT_LT(max_abs_diff(ga, gb), 1e-13);
    EXPECT_EQ(ia, ib);
}

TEST_F(VectorKernels, AxpyAndDotHandleAnyLength) {
    std::mt19937_64 rng(13);
    for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 13u, 170u}) {
        const auto x = uniform(n, -1.0, 1.0, rng);
        const auto y = uniform(n, -1.0, 1.0, rng);
        EXPECT_NEAR(ref.dot(x.data(), y.data(), n), vec->dot(x.data(), y.data(), n), 1e-13);
        auto ya = y, yb = y;
        ref.axpy(0.37, x.data(), ya.data(), n);
        vec->axpy(0.37, x.data(), yb.data(), n);
        EXPECT_LT(max_abs_diff(ya, yb), 1e-15);
    }
}
