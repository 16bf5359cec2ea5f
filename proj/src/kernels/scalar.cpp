// Reference kernels. Plain loops in the same accumulation order as the
// vector kernels; the equivalence tests compare against these.

#include "kernels_impl.hpp"

#include <cmath>

namespace dnnreg::kernels::detail {

namespace {

inline double logistic(double z) {
    const double e = std::exp(-std::fabs(z));
    const double inv = 1.0 / (1.0 + e);
    return z >= 0.0 ? inv : e * inv;
}

void sigmoid_layer(const double* weights, std::size_t rows, std::size_t fan_in, const double* in,
                   double* out, std::size_t lanes) {
    const std::size_t stride = fan_in + 1;
    for (std::size_t i = 0; i < rows; ++i) {
        const double* w = weights + i * stride;
        double* o = out + i * lanes;
        for (std::size_t s = 0; s < lanes; ++s) o[s] = w[0];
        for (std::size_t j = 0; j < fan_in; ++j) {
            const double wj = w[1 + j];
            const double* x = in + j * lanes;
            for (std::size_t s = 0; s < lanes; ++s) o[s] += wj * x[s];
        }
        for (std::size_t s = 0; s < lanes; ++s) o[s] = logistic(o[s]);
    }
}

void sigmoid_layer_backward(const double* weights, std::size_t rows, std::size_t fan_in,
                            const double* in, const double* act, double* delta, double* grad,
                            double* delta_in, std::size_t lanes) {
    const std::size_t stride = fan_in + 1;
    if (delta_in != nullptr) {
        for (std::size_t k = 0; k < fan_in * lanes; ++k) delta_in[k] = 0.0;
    }
    for (std::size_t i = 0; i < rows; ++i) {
        double* g = delta + i * lanes;
        const double* a = act + i * lanes;
        double bias = 0.0;
        for (std::size_t s = 0; s < lanes; ++s) {
            g[s] *= a[s] * (1.0 - a[s]);
            bias += g[s];
        }
        grad[i * stride] += bias;
        const double* w = weights + i * stride;
        for (std::size_t j = 0; j < fan_in; ++j) {
            const double* x = in + j * lanes;
            double acc = 0.0;
            for (std::size_t s = 0; s < lanes; ++s) acc += g[s] * x[s];
            grad[i * stride + 1 + j] += acc;
            if (delta_in != nullptr) {
                const double wj = w[1 + j];
                double* di = delta_in + j * lanes;
                for (std::size_t s = 0; s < lanes; ++s) di[s] += wj * g[s];
            }
        }
    }
}

void linear_layer(const double* w, std::size_t fan_in, const double* in, double* out,
                  std::size_t lanes) {
    for (std::size_t s = 0; s < lanes; ++s) out[s] = 0.0;
    for (std::size_t j = 0; j < fan_in; ++j) {
        const double* x = in + j * lanes;
        for (std::size_t s = 0; s < lanes; ++s) out[s] += w[j] * x[s];
    }
}

void linear_layer_backward(const double* w, std::size_t fan_in, const double* in,
                           const double* coef, double* grad, double* delta_in,
                           std::size_t lanes) {
    for (std::size_t j = 0; j < fan_in; ++j) {
        const double* x = in + j * lanes;
        double acc = 0.0;
        for (std::size_t s = 0; s < lanes; ++s) acc += coef[s] * x[s];
        grad[j] += acc;
        if (delta_in != nullptr) {
            double* di = delta_in + j * lanes;
            for (std::size_t s = 0; s < lanes; ++s) di[s] = w[j] * coef[s];
        }
    }
}

void axpy(double alpha, const double* x, double* y, std::size_t lanes) {
    for (std::size_t s = 0; s < lanes; ++s) y[s] += alpha * x[s];
}

double dot(const double* x, const double* y, std::size_t lanes) {
    double acc = 0.0;
    for (std::size_t s = 0; s < lanes; ++s) acc += x[s] * y[s];
    return acc;
}

void sigmoid(const double* z, double* out, std::size_t count) {
    for (std::size_t s = 0; s < count; ++s) out[s] = logistic(z[s]);
}

}  // namespace

const LayerKernels kScalarTable{
    Isa::scalar,           "scalar",    &sigmoid_layer, &sigmoid_layer_backward,
    &linear_layer,         &linear_layer_backward,      &axpy,
    &dot,                  &sigmoid,
};

}  // namespace dnnreg::kernels::detail
