#pragma once

#include <optional>
#include <vector>

#include "fewbit/bits.hpp"
#include "fewbit/layers.hpp"
#include "fewbit/rng.hpp"

namespace fewbit {

// The compression bottleneck: encode -> batchnorm -> tanh -> binarize ->
// decode. Training samples each bit stochastically (P(+1) = (1+a)/2, an
// unbiased estimate of the activation) and passes gradients straight
// through; inference uses the sign rule (tie -> 1).

struct FeatCompConfig {
    std::size_t n_bits = 10;
    Shape input_dims;  // e.g. {8,4,4,16}; encode flattens row-major

    std::size_t flat_dim() const { return numel(input_dims); }
};

// Stochastic draw over one activation value in [-1,1].
template <class T>
inline T sample_bit(T a, Rng& rng) {
    const double p = (1.0 + static_cast<double>(a)) / 2.0;
    return rng.uniform() < p ? T(1) : T(-1);
}

// Sign rule used at inference; a == 0 maps to bit 1.
template <class T>
inline std::uint8_t sign_bit(T a) {
    return a >= T(0) ? 1 : 0;
}

template <class T>
struct FeatComp {
    FeatCompConfig cfg;
    Dense<T> enc;
    BatchNorm1d<T> bn;
    Dense<T> dec;
    bool training = true;

    // Caches for backward: the +-1 values fed to the decoder.
    Tensor<T> binary_cache;
    Tanh<T> tanh_;

    FeatComp() = default;
    FeatComp(FeatCompConfig c, std::string name = "featcomp")
        : cfg(std::move(c)),
          enc(name + ".enc", cfg.flat_dim(), cfg.n_bits),
          bn(name + ".bn", cfg.n_bits),
          dec(name + ".dec", cfg.n_bits, cfg.flat_dim()) {
        require(cfg.n_bits >= 1, "featcomp: n_bits must be >= 1");
    }

    void init(Rng& rng) {
        enc.init(rng);
        dec.init(rng);
    }

    // x[B, flat] -> x'[B, N]
    Tensor<T> encode(const Tensor<T>& x) {
        require(x.shape.size() == 2 && x.shape[1] == cfg.flat_dim(),
                "featcomp encode: input " + shape_str(x.shape) + " does not flatten to " +
                    std::to_string(cfg.flat_dim()));
        return enc.forward(x);
    }

    // a = tanh(BN(x')), all values in [-1,1].
    Tensor<T> activate(const Tensor<T>& xp) {
        return tanh_.forward(bn.forward(xp, training));
    }

    struct Forward {
        Tensor<T> x_dec;                // [B, flat]
        Tensor<T> activation;           // [B, N], the pre-binarization tanh output
        std::vector<BitVector> bits;    // stored codes, one per batch row
    };

    Forward forward(const Tensor<T>& x, Rng* bin_rng = nullptr) {
        Forward out;
        const Tensor<T> a = activate(encode(x));
        const std::size_t B = a.shape[0], N = cfg.n_bits;
        binary_cache = Tensor<T>({B, N});
        out.bits.assign(B, BitVector(N));
        if (training) {
            require(bin_rng != nullptr, "featcomp: training forward needs a binarizer rng");
            for (std::size_t n = 0; n < B; ++n)
                for (std::size_t i = 0; i < N; ++i) {
                    const T b = binarize_stochastic_value(a.row(n)[i], *bin_rng);
                    binary_cache.at2(n, i) = b;
                    out.bits[n][i] = b > T(0) ? 1 : 0;
                }
        } else {
            for (std::size_t n = 0; n < B; ++n)
                for (std::size_t i = 0; i < N; ++i) {
                    const std::uint8_t bit = sign_bit(a.row(n)[i]);
                    out.bits[n][i] = bit;
                    binary_cache.at2(n, i) = bit ? T(1) : T(-1);
                }
        }
        out.x_dec = dec.forward(binary_cache);
        out.activation = a;
        return out;
    }

    // Straight-through: the gradient w.r.t. the binarizer output is handed
    // unchanged to the tanh activation.
    Tensor<T> backward(const Tensor<T>& g_xdec) {
        const Tensor<T> g_bin = dec.backward(g_xdec);
        const Tensor<T> g_act = tanh_.backward(g_bin);
        const Tensor<T> g_xp = bn.backward(g_act, training);
        return enc.backward(g_xp);
    }

    std::vector<Parameter<T>*> params() {
        std::vector<Parameter<T>*> ps;
        for (auto* p : enc.params()) ps.push_back(p);
        for (auto* p : bn.params()) ps.push_back(p);
        for (auto* p : dec.params()) ps.push_back(p);
        return ps;
    }

    // Single-value form of the training-time rule; rejects inputs that
    // violate the activation contract.
    static T binarize_stochastic_value(T a, Rng& rng) {
        require(a >= T(-1) - static_cast<T>(1e-6) && a <= T(1) + static_cast<T>(1e-6),
                "binarize: activation " + std::to_string(static_cast<double>(a)) +
                    " outside [-1,1]");
        return sample_bit(a, rng);
    }
};

// Free-function forms matching the per-operation contracts.

template <class T>
Tensor<T> binarize_stochastic(const Tensor<T>& a, Rng& rng) {
    Tensor<T> b(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i)
        b[i] = FeatComp<T>::binarize_stochastic_value(a[i], rng);
    return b;
}

template <class T>
BitVector binarize_deterministic(const Tensor<T>& a) {
    BitVector bits(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) bits[i] = sign_bit(a[i]);
    return bits;
}

}  // namespace fewbit
