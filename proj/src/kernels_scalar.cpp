#include "fewbit/kernels.hpp"

// Scalar reference kernels. Reductions run in `stripes<T>` independent
// accumulators combined by the pairwise tree below; the SIMD backends mirror
// this exactly, which is what makes cross-backend results bit-identical.

namespace fewbit::kern {
namespace {

template <class T>
T combine_stripes(const T* acc) {
    constexpr std::size_t L = stripes<T>;
    if constexpr (L == 8) {
        T s4[4];
        for (int j = 0; j < 4; ++j) s4[j] = acc[j] + acc[j + 4];
        T s2[2] = {s4[0] + s4[2], s4[1] + s4[3]};
        return s2[0] + s2[1];
    } else {
        static_assert(L == 4);
        T s2[2] = {acc[0] + acc[2], acc[1] + acc[3]};
        return s2[0] + s2[1];
    }
}

template <class T>
void axpy_impl(std::size_t n, T a, const T* x, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <class T>
T dot_impl(std::size_t n, const T* x, const T* y) {
    constexpr std::size_t L = stripes<T>;
    T acc[L] = {};
    const std::size_t n0 = n - n % L;
    for (std::size_t i = 0; i < n0; i += L)
        for (std::size_t l = 0; l < L; ++l) acc[l] += x[i + l] * y[i + l];
    T s = combine_stripes(acc);
    for (std::size_t i = n0; i < n; ++i) s += x[i] * y[i];
    return s;
}

template <class T>
T sum_impl(std::size_t n, const T* x) {
    constexpr std::size_t L = stripes<T>;
    T acc[L] = {};
    const std::size_t n0 = n - n % L;
    for (std::size_t i = 0; i < n0; i += L)
        for (std::size_t l = 0; l < L; ++l) acc[l] += x[i + l];
    T s = combine_stripes(acc);
    for (std::size_t i = n0; i < n; ++i) s += x[i];
    return s;
}

template <class T>
T max_impl(std::size_t n, const T* x) {
    T m = x[0];
    for (std::size_t i = 1; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

template <class T>
void add_impl(std::size_t n, const T* x, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

template <class T>
void scale_impl(std::size_t n, T a, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

template <class T>
void mul_impl(std::size_t n, const T* x, const T* y, T* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

template <class T>
void tanh_bwd_impl(std::size_t n, const T* y, const T* gy, T* gx) {
    for (std::size_t i = 0; i < n; ++i) {
        const T t = y[i] * y[i];
        const T u = T(1) - t;
        gx[i] += gy[i] * u;
    }
}

template <class T>
constexpr Kernels<T> make_table() {
    return Kernels<T>{axpy_impl<T>, dot_impl<T>,   sum_impl<T>, max_impl<T>,
                      add_impl<T>,  scale_impl<T>, mul_impl<T>, tanh_bwd_impl<T>};
}

}  // namespace

const Kernels<float> scalar_kernels_f32 = make_table<float>();
const Kernels<double> scalar_kernels_f64 = make_table<double>();

}  // namespace fewbit::kern
