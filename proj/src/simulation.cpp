#include "dnnreg/simulation.hpp"

#include "dnnreg/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dnnreg::sim {

namespace {

constexpr double kPi = boost::math::double_constants::pi;
constexpr double kBreaks[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) * boost::math::double_constants::one_div_root_two_pi;
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x * boost::math::double_constants::one_div_root_two);
}

}  // namespace

double eval_m(double x) {
    if (!(x >= -1.0 && x <= 1.0)) {
        throw std::domain_error("regression function is defined on [-1, 1] only");
    }
    if (x < -0.5) return (x + 2.0) * (x + 2.0) / 2.0;
    if (x < 0.0) return x / 2.0 + 0.875;
    if (x < 0.5) return 5.0 * (x - 0.2) * (x - 0.2) + 1.075;
    return x + 0.125;
}

double eval_noise_scale(double x) { return 0.2 - 0.1 * std::cos(2.0 * kPi * x); }

double sample_x(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    while (true) {
        const double z = normal(rng);
        if (std::abs(z) <= 1.0) return z;
    }
}

double covariate_mass() {
    static const double mass = std::erf(boost::math::double_constants::one_div_root_two);
    return mass;
}

double covariate_density(double x) {
    if (x < -1.0 || x > 1.0) return 0.0;
    return std_normal_pdf(x) / covariate_mass();
}

double covariate_cdf(double x) {
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return (std_normal_cdf(x) - std_normal_cdf(-1.0)) / covariate_mass();
}

Dataset generate_dataset(std::size_t n, Rng& rng, double noise_factor) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sample_x(rng);
        const double noise = normal(rng);
        xs[i] = x;
        ys[i] = eval_m(x) + noise_factor * eval_noise_scale(x) * noise;
    }
    return Dataset(1, std::move(xs), std::move(ys));
}

L2Quadrature::L2Quadrature(std::size_t panels_per_piece) {
    if (panels_per_piece == 0) throw std::invalid_argument("need at least one panel per piece");
    using Rule = boost::math::quadrature::gauss<double, 64>;
    const auto& abscissa = Rule::abscissa();
    const auto& base = Rule::weights();
    for (std::size_t piece = 0; piece < 4; ++piece) {
        const double lo = kBreaks[piece];
        const double width = (kBreaks[piece + 1] - lo) / static_cast<double>(panels_per_piece);
        for (std::size_t p = 0; p < panels_per_piece; ++p) {
            const double a = lo + width * static_cast<double>(p);
            const double mid = a + 0.5 * width;
            const double half = 0.5 * width;
            // The rule stores the non-negative half of its symmetric nodes.
            for (std::size_t i = abscissa.size(); i-- > 0;) {
                nodes_.push_back(mid - half * abscissa[i]);
                weights_.push_back(half * base[i]);
            }
            for (std::size_t i = 0; i < abscissa.size(); ++i) {
                if (abscissa[i] == 0.0) continue;
                nodes_.push_back(mid + half * abscissa[i]);
                weights_.push_back(half * base[i]);
            }
        }
    }
    target_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        weights_[i] *= covariate_density(nodes_[i]);
        target_[i] = eval_m(nodes_[i]);
    }
}

double L2Quadrature::error(std::span<const double> values) const {
    if (values.size() != nodes_.size()) {
        throw DimensionError("expected " + std::to_string(nodes_.size()) + " predictions, got " +
                             std::to_string(values.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw DataError("non-finite prediction in L2 error");
        const double e = values[i] - target_[i];
        sum += weights_[i] * e * e;
    }
    return sum;
}

const L2Quadrature& default_quadrature() {
    static const L2Quadrature rule;
    return rule;
}

double l2_error(const std::function<double(double)>& predictor) {
    const auto& rule = default_quadrature();
    std::vector<double> values(rule.nodes().size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = predictor(rule.nodes()[i]);
    return rule.error(values);
}

double l2_error_batch(
    const std::function<std::vector<double>(std::span<const double>)>& predictor) {
    const auto& rule = default_quadrature();
    return rule.error(predictor(rule.nodes()));
}

MonteCarloEstimate monte_carlo_l2(
    const std::function<std::vector<double>(std::span<const double>)>& predictor,
    std::size_t draws, Rng& rng) {
    if (draws < 2) throw std::invalid_argument("Monte Carlo estimate needs at least two draws");
    constexpr std::size_t kChunk = 1 << 16;
    std::vector<double> xs;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t done = 0; done < draws; done += xs.size()) {
        xs.resize(std::min(kChunk, draws - done));
        for (double& x : xs) x = sample_x(rng);
        const auto values = predictor(xs);
        if (values.size() != xs.size()) throw DimensionError("predictor returned wrong count");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = values[i] - eval_m(xs[i]);
            sum += e * e;
            sum_sq += e * e * e * e;
        }
    }
    const double nd = static_cast<double>(draws);
    const double mean = sum / nd;
    const double var = std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0));
    return {mean, std::sqrt(var / nd)};
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Spread median_iqr(const std::vector<double>& values) {
    return {quantile(values, 0.5), quantile(values, 0.75) - quantile(values, 0.25)};
}

}  // namespace dnnreg::sim
