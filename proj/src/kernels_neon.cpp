#include "fewbit/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

// NEON kernels. Two 128-bit registers emulate one 256-bit stripe set so the
// accumulator layout and combine order match the scalar reference exactly.

namespace fewbit::kern {
namespace {

inline float combine8(float32x4_t a03, float32x4_t a47) {
    const float32x4_t s4 = vaddq_f32(a03, a47);                 // [a0+a4, a1+a5, a2+a6, a3+a7]
    const float32x2_t s2 = vadd_f32(vget_low_f32(s4), vget_high_f32(s4));
    return vget_lane_f32(s2, 0) + vget_lane_f32(s2, 1);
}

inline double combine4(float64x2_t a01, float64x2_t a23) {
    const float64x2_t s2 = vaddq_f64(a01, a23);                 // [a0+a2, a1+a3]
    return vgetq_lane_f64(s2, 0) + vgetq_lane_f64(s2, 1);
}

void axpy_f32(std::size_t n, float a, const float* x, float* y) {
    const float32x4_t va = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), vmulq_f32(va, vld1q_f32(x + i))));
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_f64(std::size_t n, double a, const double* x, double* y) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    for (; i < n; ++i) y[i] += a * x[i];
}

float dot_f32(std::size_t n, const float* x, const float* y) {
    float32x4_t a03 = vdupq_n_f32(0.0f), a47 = vdupq_n_f32(0.0f);
    const std::size_t n0 = n - n % 8;
    for (std::size_t i = 0; i < n0; i += 8) {
        a03 = vaddq_f32(a03, vmulq_f32(vld1q_f32(x + i), vld1q_f32(y + i)));
        a47 = vaddq_f32(a47, vmulq_f32(vld1q_f32(x + i + 4), vld1q_f32(y + i + 4)));
    }
    float s = combine8(a03, a47);
    for (std::size_t i = n0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double dot_f64(std::size_t n, const double* x, const double* y) {
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    const std::size_t n0 = n - n % 4;
    for (std::size_t i = 0; i < n0; i += 4) {
        a01 = vaddq_f64(a01, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
        a23 = vaddq_f64(a23, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
    }
    double s = combine4(a01, a23);
    for (std::size_t i = n0; i < n; ++i) s += x[i] * y[i];
    return s;
}

float sum_f32(std::size_t n, const float* x) {
    float32x4_t a03 = vdupq_n_f32(0.0f), a47 = vdupq_n_f32(0.0f);
    const std::size_t n0 = n - n % 8;
    for (std::size_t i = 0; i < n0; i += 8) {
        a03 = vaddq_f32(a03, vld1q_f32(x + i));
        a47 = vaddq_f32(a47, vld1q_f32(x + i + 4));
    }
    float s = combine8(a03, a47);
    for (std::size_t i = n0; i < n; ++i) s += x[i];
    return s;
}

double sum_f64(std::size_t n, const double* x) {
    float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
    const std::size_t n0 = n - n % 4;
    for (std::size_t i = 0; i < n0; i += 4) {
        a01 = vaddq_f64(a01, vld1q_f64(x + i));
        a23 = vaddq_f64(a23, vld1q_f64(x + i + 2));
    }
    double s = combine4(a01, a23);
    for (std::size_t i = n0; i < n; ++i) s += x[i];
    return s;
}

float max_f32(std::size_t n, const float* x) {
    float m = x[0];
    std::size_t i = 1;
    if (n >= 5) {
        float32x4_t vm = vld1q_f32(x);
        for (i = 4; i + 4 <= n; i += 4) vm = vmaxq_f32(vm, vld1q_f32(x + i));
        m = vmaxvq_f32(vm);
    }
    for (; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

double max_f64(std::size_t n, const double* x) {
    double m = x[0];
    std::size_t i = 1;
    if (n >= 3) {
        float64x2_t vm = vld1q_f64(x);
        for (i = 2; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vld1q_f64(x + i));
        m = vmaxvq_f64(vm);
    }
    for (; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

void add_f32(std::size_t n, const float* x, float* y) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void add_f64(std::size_t n, const double* x, double* y) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void scale_f32(std::size_t n, float a, float* y) {
    const float32x4_t va = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmulq_f32(vld1q_f32(y + i), va));
    for (; i < n; ++i) y[i] *= a;
}

void scale_f64(std::size_t n, double a, double* y) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(vld1q_f64(y + i), va));
    for (; i < n; ++i) y[i] *= a;
}

void mul_f32(std::size_t n, const float* x, const float* y, float* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vst1q_f32(out + i, vmulq_f32(vld1q_f32(x + i), vld1q_f32(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void mul_f64(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void tanh_bwd_f32(std::size_t n, const float* y, const float* gy, float* gx) {
    const float32x4_t one = vdupq_n_f32(1.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t vy = vld1q_f32(y + i);
        const float32x4_t u = vsubq_f32(one, vmulq_f32(vy, vy));
        const float32x4_t g = vmulq_f32(vld1q_f32(gy + i), u);
        vst1q_f32(gx + i, vaddq_f32(vld1q_f32(gx + i), g));
    }
    for (; i < n; ++i) {
        const float t = y[i] * y[i];
        const float u = 1.0f - t;
        gx[i] += gy[i] * u;
    }
}

void tanh_bwd_f64(std::size_t n, const double* y, const double* gy, double* gx) {
    const float64x2_t one = vdupq_n_f64(1.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t vy = vld1q_f64(y + i);
        const float64x2_t u = vsubq_f64(one, vmulq_f64(vy, vy));
        const float64x2_t g = vmulq_f64(vld1q_f64(gy + i), u);
        vst1q_f64(gx + i, vaddq_f64(vld1q_f64(gx + i), g));
    }
    for (; i < n; ++i) {
        const double t = y[i] * y[i];
        const double u = 1.0 - t;
        gx[i] += gy[i] * u;
    }
}

}  // namespace

const Kernels<float> neon_kernels_f32 = {axpy_f32, dot_f32,   sum_f32, max_f32,
                                         add_f32,  scale_f32, mul_f32, tanh_bwd_f32};
const Kernels<double> neon_kernels_f64 = {axpy_f64, dot_f64,   sum_f64, max_f64,
                                          add_f64,  scale_f64, mul_f64, tanh_bwd_f64};

}  // namespace fewbit::kern

#endif  // aarch64
