#include "fewbit/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

// AVX2 kernels. mul+add only (no FMA) and the same stripe/combine order as
// the scalar reference, so results match it bit for bit.

namespace fewbit::kern {
namespace {

inline float hsum256(__m256 v) {
    const __m128 lo = _mm256_castps256_ps128(v);
    const __m128 hi = _mm256_extractf128_ps(v, 1);
    const __m128 s4 = _mm_add_ps(lo, hi);
    const __m128 s2 = _mm_add_ps(s4, _mm_movehl_ps(s4, s4));
    const __m128 s1 = _mm_add_ss(s2, _mm_shuffle_ps(s2, s2, 0x1));
    return _mm_cvtss_f32(s1);
}

inline double hsum256d(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s2 = _mm_add_pd(lo, hi);
    const __m128d s1 = _mm_add_sd(s2, _mm_unpackhi_pd(s2, s2));
    return _mm_cvtsd_f64(s1);
}

void axpy_f32(std::size_t n, float a, const float* x, float* y) {
    const __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 vy = _mm256_loadu_ps(y + i);
        const __m256 vx = _mm256_loadu_ps(x + i);
        _mm256_storeu_ps(y + i, _mm256_add_ps(vy, _mm256_mul_ps(va, vx)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_f64(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

float dot_f32(std::size_t n, const float* x, const float* y) {
    __m256 acc = _mm256_setzero_ps();
    const std::size_t n0 = n - n % 8;
    for (std::size_t i = 0; i < n0; i += 8)
        acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    float s = hsum256(acc);
    for (std::size_t i = n0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double dot_f64(std::size_t n, const double* x, const double* y) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n0 = n - n % 4;
    for (std::size_t i = 0; i < n0; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    double s = hsum256d(acc);
    for (std::size_t i = n0; i < n; ++i) s += x[i] * y[i];
    return s;
}

float sum_f32(std::size_t n, const float* x) {
    __m256 acc = _mm256_setzero_ps();
    const std::size_t n0 = n - n % 8;
    for (std::size_t i = 0; i < n0; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
    float s = hsum256(acc);
    for (std::size_t i = n0; i < n; ++i) s += x[i];
    return s;
}

double sum_f64(std::size_t n, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n0 = n - n % 4;
    for (std::size_t i = 0; i < n0; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum256d(acc);
    for (std::size_t i = n0; i < n; ++i) s += x[i];
    return s;
}

float max_f32(std::size_t n, const float* x) {
    float m = x[0];
    std::size_t i = 1;
    if (n >= 9) {
        __m256 vm = _mm256_loadu_ps(x);
        for (i = 8; i + 8 <= n; i += 8) vm = _mm256_max_ps(vm, _mm256_loadu_ps(x + i));
        const __m128 q = _mm_max_ps(_mm256_castps256_ps128(vm), _mm256_extractf128_ps(vm, 1));
        const __m128 d = _mm_max_ps(q, _mm_movehl_ps(q, q));
        m = _mm_cvtss_f32(_mm_max_ss(d, _mm_shuffle_ps(d, d, 0x1)));
    }
    for (; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

double max_f64(std::size_t n, const double* x) {
    double m = x[0];
    std::size_t i = 1;
    if (n >= 5) {
        __m256d vm = _mm256_loadu_pd(x);
        for (i = 4; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(x + i));
        const __m128d q = _mm_max_pd(_mm256_castpd256_pd128(vm), _mm256_extractf128_pd(vm, 1));
        m = _mm_cvtsd_f64(_mm_max_sd(q, _mm_unpackhi_pd(q, q)));
    }
    for (; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

void add_f32(std::size_t n, const float* x, float* y) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void add_f64(std::size_t n, const double* x, double* y) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void scale_f32(std::size_t n, float a, float* y) {
    const __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(y + i), va));
    for (; i < n; ++i) y[i] *= a;
}

void scale_f64(std::size_t n, double a, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), va));
    for (; i < n; ++i) y[i] *= a;
}

void mul_f32(std::size_t n, const float* x, const float* y, float* out) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void mul_f64(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void tanh_bwd_f32(std::size_t n, const float* y, const float* gy, float* gx) {
    const __m256 one = _mm256_set1_ps(1.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 vy = _mm256_loadu_ps(y + i);
        const __m256 u = _mm256_sub_ps(one, _mm256_mul_ps(vy, vy));
        const __m256 g = _mm256_mul_ps(_mm256_loadu_ps(gy + i), u);
        _mm256_storeu_ps(gx + i, _mm256_add_ps(_mm256_loadu_ps(gx + i), g));
    }
    for (; i < n; ++i) {
        const float t = y[i] * y[i];
        const float u = 1.0f - t;
        gx[i] += gy[i] * u;
    }
}

void tanh_bwd_f64(std::size_t n, const double* y, const double* gy, double* gx) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d u = _mm256_sub_pd(one, _mm256_mul_pd(vy, vy));
        const __m256d g = _mm256_mul_pd(_mm256_loadu_pd(gy + i), u);
        _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), g));
    }
    for (; i < n; ++i) {
        const double t = y[i] * y[i];
        const double u = 1.0 - t;
        gx[i] += gy[i] * u;
    }
}

}  // namespace

const Kernels<float> avx2_kernels_f32 = {axpy_f32, dot_f32,   sum_f32, max_f32,
                                         add_f32,  scale_f32, mul_f32, tanh_bwd_f32};
const Kernels<double> avx2_kernels_f64 = {axpy_f64, dot_f64,   sum_f64, max_f64,
                                          add_f64,  scale_f64, mul_f64, tanh_bwd_f64};

}  // namespace fewbit::kern

#endif  // x86
