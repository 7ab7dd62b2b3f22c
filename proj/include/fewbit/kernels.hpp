#pragma once

#include <cstddef>
#include <string>

namespace fewbit::kern {

// Number of independent accumulator stripes per element type (one 256-bit
// register's worth). Every backend computes reductions in exactly this many
// chains and combines them with the same pairwise tree, so dot/sum results
// are bit-identical between the scalar reference and the SIMD variants.
template <class T>
inline constexpr std::size_t stripes = 32 / sizeof(T);

template <class T>
struct Kernels {
    void (*axpy)(std::size_t n, T a, const T* x, T* y);               // y += a*x
    T (*dot)(std::size_t n, const T* x, const T* y);
    T (*sum)(std::size_t n, const T* x);
    T (*max)(std::size_t n, const T* x);                              // n >= 1
    void (*add)(std::size_t n, const T* x, T* y);                     // y += x
    void (*scale)(std::size_t n, T a, T* y);                          // y *= a
    void (*mul)(std::size_t n, const T* x, const T* y, T* out);       // out = x*y
    void (*tanh_bwd)(std::size_t n, const T* y, const T* gy, T* gx);  // gx += gy*(1-y^2)
};

enum class Backend { scalar, avx2, neon };

const char* backend_name(Backend b);
bool backend_supported(Backend b);

// Backend used for this process: FEWBIT_KERNELS={scalar,avx2,neon} if set,
// otherwise the best one the CPU supports. Fixed at first use.
Backend active_backend();

template <class T>
const Kernels<T>& table(Backend b);  // throws if unsupported

template <class T>
inline const Kernels<T>& active() {
    static const Kernels<T>& k = table<T>(active_backend());
    return k;
}

}  // namespace fewbit::kern
