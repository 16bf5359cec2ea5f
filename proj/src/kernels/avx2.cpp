// AVX2 + FMA kernels. Every function carries its own target attribute so
// that nothing else in the binary is compiled for AVX2; the dispatcher only
// hands this table out after checking CPU support.
//
// Vectorization runs across samples: each weight is broadcast and applied
// to four samples per register, two registers per iteration.

#include "kernels_impl.hpp"

#if defined(DNNREG_HAVE_AVX2)

#include <immintrin.h>

#define DNNREG_AVX2 __attribute__((target("avx2,fma")))

namespace dnnreg::kernels::detail {

namespace {

// lo + hi * r
DNNREG_AVX2 inline __m256d pair(__m256d r, double lo, double hi) {
    return _mm256_fmadd_pd(_mm256_set1_pd(hi), r, _mm256_set1_pd(lo));
}

// exp(x) for x <= 0: x = n*ln2 + r with |r| <= ln2/2, a degree-13 Taylor
// polynomial for exp(r) (truncation error below 2e-17), and scaling by 2^n
// built in the exponent bits. Results below the normal range flush to zero.
DNNREG_AVX2 inline __m256d exp_nonpositive(__m256d x) {
    const __m256d min_arg = _mm256_set1_pd(-708.3964185322641);
    const __m256d underflow = _mm256_cmp_pd(x, min_arg, _CMP_LT_OQ);
    x = _mm256_max_pd(x, min_arg);

    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);

    // Estrin evaluation of sum_{k=0}^{13} r^k / k! keeps the dependency chain short.
    const __m256d r2 = _mm256_mul_pd(r, r);
    const __m256d r4 = _mm256_mul_pd(r2, r2);
    const __m256d r8 = _mm256_mul_pd(r4, r4);
    const __m256d p01 = pair(r, 1.0, 1.0);
    const __m256d p23 = pair(r, 1.0 / 2.0, 1.0 / 6.0);
    const __m256d p45 = pair(r, 1.0 / 24.0, 1.0 / 120.0);
    const __m256d p67 = pair(r, 1.0 / 720.0, 1.0 / 5040.0);
    const __m256d p89 = pair(r, 1.0 / 40320.0, 1.0 / 362880.0);
    const __m256d p1011 = pair(r, 1.0 / 3628800.0, 1.0 / 39916800.0);
    const __m256d p1213 = pair(r, 1.0 / 479001600.0, 1.0 / 6227020800.0);
    const __m256d q0 = _mm256_fmadd_pd(p23, r2, p01);
    const __m256d q1 = _mm256_fmadd_pd(p67, r2, p45);
    const __m256d q2 = _mm256_fmadd_pd(p1011, r2, p89);
    const __m256d q3 = p1213;
    const __m256d h0 = _mm256_fmadd_pd(q1, r4, q0);
    const __m256d h1 = _mm256_fmadd_pd(q3, r4, q2);
    __m256d e = _mm256_fmadd_pd(h1, r8, h0);

    __m256i bits = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
    bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
    bits = _mm256_slli_epi64(bits, 52);
    e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, e);
}

// Matches the scalar formulation: e = exp(-|z|), 1/(1+e) for z >= 0 and
// e/(1+e) otherwise. NaN inputs stay NaN. When every lane is saturated the
// result is returned directly: 1 + exp(-37) already rounds to 1, and below
// the exp underflow threshold the full path yields 0 as well.
DNNREG_AVX2 inline __m256d logistic(__m256d z) {
    const __m256d high = _mm256_cmp_pd(z, _mm256_set1_pd(37.0), _CMP_GE_OQ);
    const __m256d low = _mm256_cmp_pd(z, _mm256_set1_pd(-708.3964185322641), _CMP_LT_OQ);
    if (_mm256_movemask_pd(_mm256_or_pd(high, low)) == 0xF) {
        return _mm256_and_pd(high, _mm256_set1_pd(1.0));
    }
    const __m256d sign = _mm256_set1_pd(-0.0);
    const __m256d neg_abs = _mm256_or_pd(z, sign);
    const __m256d e = exp_nonpositive(neg_abs);
    const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_add_pd(_mm256_set1_pd(1.0), e));
    const __m256d nonneg = _mm256_cmp_pd(z, _mm256_setzero_pd(), _CMP_GE_OQ);
    __m256d out = _mm256_blendv_pd(_mm256_mul_pd(e, inv), inv, nonneg);
    const __m256d nan = _mm256_cmp_pd(z, z, _CMP_UNORD_Q);
    return _mm256_blendv_pd(out, z, nan);
}

DNNREG_AVX2 inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

DNNREG_AVX2 void sigmoid_layer(const double* weights, std::size_t rows, std::size_t fan_in,
                               const double* in, double* out, std::size_t lanes) {
    const std::size_t stride = fan_in + 1;
    for (std::size_t i = 0; i < rows; ++i) {
        const double* w = weights + i * stride;
        double* o = out + i * lanes;
        const __m256d bias = _mm256_set1_pd(w[0]);
        for (std::size_t s = 0; s < lanes; s += 8) {
            __m256d acc0 = bias;
            __m256d acc1 = bias;
            for (std::size_t j = 0; j < fan_in; ++j) {
                const __m256d wj = _mm256_set1_pd(w[1 + j]);
                const double* x = in + j * lanes + s;
                acc0 = _mm256_fmadd_pd(wj, _mm256_loadu_pd(x), acc0);
                acc1 = _mm256_fmadd_pd(wj, _mm256_loadu_pd(x + 4), acc1);
            }
            _mm256_storeu_pd(o + s, logistic(acc0));
            _mm256_storeu_pd(o + s + 4, logistic(acc1));
        }
    }
}

DNNREG_AVX2 void sigmoid_layer_backward(const double* weights, std::size_t rows,
                                        std::size_t fan_in, const double* in, const double* act,
                                        double* delta, double* grad, double* delta_in,
                                        std::size_t lanes) {
    const std::size_t stride = fan_in + 1;
    const __m256d one = _mm256_set1_pd(1.0);
    if (delta_in != nullptr) {
        for (std::size_t k = 0; k < fan_in * lanes; k += 4) {
            _mm256_storeu_pd(delta_in + k, _mm256_setzero_pd());
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        double* g = delta + i * lanes;
        const double* a = act + i * lanes;
        __m256d bias0 = _mm256_setzero_pd();
        __m256d bias1 = _mm256_setzero_pd();
        for (std::size_t s = 0; s < lanes; s += 8) {
            const __m256d a0 = _mm256_loadu_pd(a + s);
            const __m256d a1 = _mm256_loadu_pd(a + s + 4);
            const __m256d g0 = _mm256_mul_pd(_mm256_loadu_pd(g + s),
                                             _mm256_mul_pd(a0, _mm256_sub_pd(one, a0)));
            const __m256d g1 = _mm256_mul_pd(_mm256_loadu_pd(g + s + 4),
                                             _mm256_mul_pd(a1, _mm256_sub_pd(one, a1)));
            _mm256_storeu_pd(g + s, g0);
            _mm256_storeu_pd(g + s + 4, g1);
            bias0 = _mm256_add_pd(bias0, g0);
            bias1 = _mm256_add_pd(bias1, g1);
        }
        grad[i * stride] += hsum(_mm256_add_pd(bias0, bias1));

        const double* w = weights + i * stride;
        for (std::size_t j = 0; j < fan_in; ++j) {
            const double* x = in + j * lanes;
            __m256d acc0 = _mm256_setzero_pd();
            __m256d acc1 = _mm256_setzero_pd();
            if (delta_in != nullptr) {
                const __m256d wj = _mm256_set1_pd(w[1 + j]);
                double* di = delta_in + j * lanes;
                for (std::size_t s = 0; s < lanes; s += 8) {
                    const __m256d g0 = _mm256_loadu_pd(g + s);
                    const __m256d g1 = _mm256_loadu_pd(g + s + 4);
                    acc0 = _mm256_fmadd_pd(g0, _mm256_loadu_pd(x + s), acc0);
                    acc1 = _mm256_fmadd_pd(g1, _mm256_loadu_pd(x + s + 4), acc1);
                    _mm256_storeu_pd(di + s, _mm256_fmadd_pd(wj, g0, _mm256_loadu_pd(di + s)));
                    _mm256_storeu_pd(di + s + 4,
                                     _mm256_fmadd_pd(wj, g1, _mm256_loadu_pd(di + s + 4)));
                }
            } else {
                for (std::size_t s = 0; s < lanes; s += 8) {
                    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(g + s), _mm256_loadu_pd(x + s), acc0);
                    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(g + s + 4), _mm256_loadu_pd(x + s + 4),
                                           acc1);
                }
            }
            grad[i * stride + 1 + j] += hsum(_mm256_add_pd(acc0, acc1));
        }
    }
}

DNNREG_AVX2 void linear_layer(const double* w, std::size_t fan_in, const double* in, double* out,
                              std::size_t lanes) {
    for (std::size_t s = 0; s < lanes; s += 8) {
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        for (std::size_t j = 0; j < fan_in; ++j) {
            const __m256d wj = _mm256_set1_pd(w[j]);
            const double* x = in + j * lanes + s;
            acc0 = _mm256_fmadd_pd(wj, _mm256_loadu_pd(x), acc0);
            acc1 = _mm256_fmadd_pd(wj, _mm256_loadu_pd(x + 4), acc1);
        }
        _mm256_storeu_pd(out + s, acc0);
        _mm256_storeu_pd(out + s + 4, acc1);
    }
}

DNNREG_AVX2 double dot(const double* x, const double* y, std::size_t lanes) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t s = 0;
    for (; s + 8 <= lanes; s += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + s), _mm256_loadu_pd(y + s), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + s + 4), _mm256_loadu_pd(y + s + 4), acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; s < lanes; ++s) acc += x[s] * y[s];
    return acc;
}

DNNREG_AVX2 void linear_layer_backward(const double* w, std::size_t fan_in, const double* in,
                                       const double* coef, double* grad, double* delta_in,
                                       std::size_t lanes) {
    for (std::size_t j = 0; j < fan_in; ++j) {
        grad[j] += dot(coef, in + j * lanes, lanes);
        if (delta_in != nullptr) {
            const __m256d wj = _mm256_set1_pd(w[j]);
            double* di = delta_in + j * lanes;
            for (std::size_t s = 0; s < lanes; s += 4) {
                _mm256_storeu_pd(di + s, _mm256_mul_pd(wj, _mm256_loadu_pd(coef + s)));
            }
        }
    }
}

DNNREG_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t lanes) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t s = 0;
    for (; s + 4 <= lanes; s += 4) {
        _mm256_storeu_pd(y + s, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + s), _mm256_loadu_pd(y + s)));
    }
    for (; s < lanes; ++s) y[s] += alpha * x[s];
}

DNNREG_AVX2 void sigmoid(const double* z, double* out, std::size_t count) {
    for (std::size_t s = 0; s < count; s += 4) {
        _mm256_storeu_pd(out + s, logistic(_mm256_loadu_pd(z + s)));
    }
}

}  // namespace

const LayerKernels kAvx2Table{
    Isa::avx2,     "avx2", &sigmoid_layer, &sigmoid_layer_backward, &linear_layer,
    &linear_layer_backward, &axpy,         &dot,                    &sigmoid,
};

}  // namespace dnnreg::kernels::detail

#endif  // DNNREG_HAVE_AVX2
