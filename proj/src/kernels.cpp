#include "fewbit/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fewbit::kern {

extern const Kernels<float> scalar_kernels_f32;
extern const Kernels<double> scalar_kernels_f64;

#if defined(__x86_64__) || defined(__i386__)
extern const Kernels<float> avx2_kernels_f32;
extern const Kernels<double> avx2_kernels_f64;
#endif
#if defined(__aarch64__)
extern const Kernels<float> neon_kernels_f32;
extern const Kernels<double> neon_kernels_f64;
#endif

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(__x86_64__) || defined(__i386__)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Backend::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

namespace {

Backend detect() {
    if (const char* env = std::getenv("FEWBIT_KERNELS")) {
        const std::string s(env);
        Backend b;
        if (s == "scalar")
            b = Backend::scalar;
        else if (s == "avx2")
            b = Backend::avx2;
        else if (s == "neon")
            b = Backend::neon;
        else
            throw std::runtime_error("FEWBIT_KERNELS: unknown backend '" + s + "'");
        if (!backend_supported(b))
            throw std::runtime_error("FEWBIT_KERNELS: backend '" + s + "' not supported on this CPU");
        return b;
    }
    if (backend_supported(Backend::avx2)) return Backend::avx2;
    if (backend_supported(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

}  // namespace

Backend active_backend() {
    static const Backend b = detect();
    return b;
}

template <>
const Kernels<float>& table<float>(Backend b) {
    switch (b) {
        case Backend::scalar:
            return scalar_kernels_f32;
#if defined(__x86_64__) || defined(__i386__)
        case Backend::avx2:
            if (backend_supported(Backend::avx2)) return avx2_kernels_f32;
            break;
#endif
#if defined(__aarch64__)
        case Backend::neon:
            return neon_kernels_f32;
#endif
        default:
            break;
    }
    throw std::runtime_error(std::string("kernel backend '") + backend_name(b) +
                             "' not available in this build");
}

template <>
const Kernels<double>& table<double>(Backend b) {
    switch (b) {
        case Backend::scalar:
            return scalar_kernels_f64;
#if defined(__x86_64__) || defined(__i386__)
        case Backend::avx2:
            if (backend_supported(Backend::avx2)) return avx2_kernels_f64;
            break;
#endif
#if defined(__aarch64__)
        case Backend::neon:
            return neon_kernels_f64;
#endif
        default:
            break;
    }
    throw std::runtime_error(std::string("kernel backend '") + backend_name(b) +
                             "' not available in this build");
}

}  // namespace fewbit::kern
