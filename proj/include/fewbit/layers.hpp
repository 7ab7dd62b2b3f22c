#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fewbit/kernels.hpp"
#include "fewbit/rng.hpp"
#include "fewbit/tensor.hpp"

namespace fewbit {

template <class T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;

    Parameter() = default;
    Parameter(std::string n, Shape s) : name(std::move(n)), value(s), grad(std::move(s)) {}

    void zero_grad() { grad.zero(); }
};

// Glorot-style uniform init in +-sqrt(6/(fan_in+fan_out)).
template <class T>
void init_uniform(Parameter<T>& p, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& x : p.value.v) x = static_cast<T>(rng.uniform(-bound, bound));
}

// ---------------------------------------------------------------------------
// Fully connected layer, x[B,I] -> y[B,O].

template <class T>
struct Dense {
    Parameter<T> w;  // [I,O]
    Parameter<T> b;  // [O]
    Tensor<T> x_cache;

    Dense() = default;
    Dense(std::string name, std::size_t in, std::size_t out)
        : w(name + ".w", {in, out}), b(name + ".b", {out}) {}

    std::size_t in_dim() const { return w.value.shape[0]; }
    std::size_t out_dim() const { return w.value.shape[1]; }

    void init(Rng& rng) {
        init_uniform(w, in_dim(), out_dim(), rng);
        b.value.zero();
    }

    Tensor<T> forward(const Tensor<T>& x) {
        require(x.shape.size() == 2 && x.shape[1] == in_dim(),
                "dense " + w.name + ": input " + shape_str(x.shape) + " does not match weight " +
                    shape_str(w.value.shape));
        const auto& k = kern::active<T>();
        const std::size_t B = x.shape[0], I = in_dim(), O = out_dim();
        x_cache = x;
        Tensor<T> y({B, O});
        for (std::size_t n = 0; n < B; ++n) {
            T* yr = y.row(n);
            for (std::size_t o = 0; o < O; ++o) yr[o] = b.value[o];
            const T* xr = x.row(n);
            for (std::size_t i = 0; i < I; ++i) k.axpy(O, xr[i], w.value.data() + i * O, yr);
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const auto& k = kern::active<T>();
        const std::size_t B = x_cache.shape[0], I = in_dim(), O = out_dim();
        require(gy.shape.size() == 2 && gy.shape[0] == B && gy.shape[1] == O,
                "dense " + w.name + ": bad upstream gradient shape " + shape_str(gy.shape));
        Tensor<T> gx({B, I});
        for (std::size_t n = 0; n < B; ++n) {
            const T* gr = gy.row(n);
            const T* xr = x_cache.row(n);
            T* gxr = gx.row(n);
            for (std::size_t i = 0; i < I; ++i) {
                gxr[i] = k.dot(O, gr, w.value.data() + i * O);
                k.axpy(O, xr[i], gr, w.grad.data() + i * O);
            }
            k.add(O, gr, b.grad.data());
        }
        return gx;
    }

    std::vector<Parameter<T>*> params() { return {&w, &b}; }
};

// ---------------------------------------------------------------------------
// 3x3 convolution, stride 1, zero padding 1 (same-size output).
// x[B,C,H,W] -> y[B,F,H,W]. Only the 3x3 configuration is supported.

template <class T>
struct Conv2d3x3 {
    Parameter<T> k;  // [F,C,3,3]
    Parameter<T> b;  // [F]
    Tensor<T> x_cache;

    Conv2d3x3() = default;
    Conv2d3x3(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t ksize = 3)
        : k(name + ".k", {out_ch, in_ch, ksize, ksize}), b(name + ".b", {out_ch}) {
        require(ksize == 3, "conv " + name + ": only 3x3 kernels are supported, got " +
                                std::to_string(ksize) + "x" + std::to_string(ksize));
    }

    std::size_t in_ch() const { return k.value.shape[1]; }
    std::size_t out_ch() const { return k.value.shape[0]; }

    void init(Rng& rng) {
        init_uniform(k, in_ch() * 9, out_ch() * 9, rng);
        b.value.zero();
    }

    Tensor<T> forward(const Tensor<T>& x) {
        require(x.shape.size() == 4 && x.shape[1] == in_ch(),
                "conv " + k.name + ": input " + shape_str(x.shape) + " does not match kernel " +
                    shape_str(k.value.shape));
        const auto& kn = kern::active<T>();
        const std::size_t B = x.shape[0], C = in_ch(), F = out_ch();
        const std::size_t H = x.shape[2], W = x.shape[3];
        x_cache = x;
        Tensor<T> y({B, F, H, W});
        for (std::size_t n = 0; n < B; ++n) {
            for (std::size_t f = 0; f < F; ++f) {
                T* yplane = y.data() + ((n * F + f) * H) * W;
                for (std::size_t i = 0; i < H * W; ++i) yplane[i] = b.value[f];
                for (std::size_t c = 0; c < C; ++c) {
                    const T* xplane = x.data() + ((n * C + c) * H) * W;
                    for (int ky = 0; ky < 3; ++ky) {
                        for (int kx = 0; kx < 3; ++kx) {
                            const T wv = k.value[((f * C + c) * 3 + ky) * 3 + kx];
                            accumulate_shifted(kn, wv, xplane, yplane, H, W, ky - 1, kx - 1);
                        }
                    }
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const auto& kn = kern::active<T>();
        const std::size_t B = x_cache.shape[0], C = in_ch(), F = out_ch();
        const std::size_t H = x_cache.shape[2], W = x_cache.shape[3];
        Tensor<T> gx({B, C, H, W});
        for (std::size_t n = 0; n < B; ++n) {
            for (std::size_t f = 0; f < F; ++f) {
                const T* gplane = gy.data() + ((n * F + f) * H) * W;
                b.grad[f] += kn.sum(H * W, gplane);
                for (std::size_t c = 0; c < C; ++c) {
                    const T* xplane = x_cache.data() + ((n * C + c) * H) * W;
                    T* gxplane = gx.data() + ((n * C + c) * H) * W;
                    for (int ky = 0; ky < 3; ++ky) {
                        for (int kx = 0; kx < 3; ++kx) {
                            const std::size_t widx = ((f * C + c) * 3 + ky) * 3 + kx;
                            k.grad[widx] += correlate_shifted(kn, gplane, xplane, H, W, ky - 1, kx - 1);
                            // dL/dx: scatter gy back through the same offset.
                            accumulate_shifted_t(kn, k.value[widx], gplane, gxplane, H, W, ky - 1, kx - 1);
                        }
                    }
                }
            }
        }
        return gx;
    }

    std::vector<Parameter<T>*> params() { return {&k, &b}; }

  private:
    struct ShiftRange {
        std::ptrdiff_t oy0, oy1, ox0, ox1;
    };

    static ShiftRange valid_range(std::size_t H, std::size_t W, int dy, int dx) {
        const auto sH = static_cast<std::ptrdiff_t>(H), sW = static_cast<std::ptrdiff_t>(W);
        return {dy < 0 ? -dy : 0, dy > 0 ? sH - dy : sH,
                dx < 0 ? -dx : 0, dx > 0 ? sW - dx : sW};
    }

    // y[oy,ox] += w * x[oy+dy, ox+dx] over valid coordinates.
    static void accumulate_shifted(const kern::Kernels<T>& kn, T w, const T* x, T* y,
                                   std::size_t H, std::size_t W, int dy, int dx) {
        const ShiftRange r = valid_range(H, W, dy, dx);
        const auto sW = static_cast<std::ptrdiff_t>(W);
        for (std::ptrdiff_t oy = r.oy0; oy < r.oy1; ++oy)
            kn.axpy(static_cast<std::size_t>(r.ox1 - r.ox0), w,
                    x + (oy + dy) * sW + r.ox0 + dx, y + oy * sW + r.ox0);
    }

    // x[oy+dy,ox+dx] += w * g[oy,ox], the transpose of accumulate_shifted.
    static void accumulate_shifted_t(const kern::Kernels<T>& kn, T w, const T* g, T* x,
                                     std::size_t H, std::size_t W, int dy, int dx) {
        const ShiftRange r = valid_range(H, W, dy, dx);
        const auto sW = static_cast<std::ptrdiff_t>(W);
        for (std::ptrdiff_t oy = r.oy0; oy < r.oy1; ++oy)
            kn.axpy(static_cast<std::size_t>(r.ox1 - r.ox0), w, g + oy * sW + r.ox0,
                    x + (oy + dy) * sW + r.ox0 + dx);
    }

    // sum over valid coords of g[oy,ox] * x[oy+dy, ox+dx].
    static T correlate_shifted(const kern::Kernels<T>& kn, const T* g, const T* x,
                               std::size_t H, std::size_t W, int dy, int dx) {
        const ShiftRange r = valid_range(H, W, dy, dx);
        const auto sW = static_cast<std::ptrdiff_t>(W);
        T acc = T(0);
        for (std::ptrdiff_t oy = r.oy0; oy < r.oy1; ++oy)
            acc += kn.dot(static_cast<std::size_t>(r.ox1 - r.ox0), g + oy * sW + r.ox0,
                          x + (oy + dy) * sW + r.ox0 + dx);
        return acc;
    }
};

// ---------------------------------------------------------------------------
// Batch normalization over [B,F] feature columns. Train mode uses batch
// statistics (biased variance) and updates running stats with momentum;
// eval mode normalizes with the running stats.

template <class T>
struct BatchNorm1d {
    Parameter<T> gamma;  // [F]
    Parameter<T> beta;   // [F]
    Tensor<T> running_mean;
    Tensor<T> running_var;
    T eps = static_cast<T>(1e-5);
    T momentum = static_cast<T>(0.1);

    // train-mode caches
    Tensor<T> xhat_cache;
    Tensor<T> inv_std_cache;

    BatchNorm1d() = default;
    BatchNorm1d(std::string name, std::size_t features)
        : gamma(name + ".gamma", {features}),
          beta(name + ".beta", {features}),
          running_mean({features}),
          running_var({features}, T(1)) {
        gamma.value.fill(T(1));
    }

    std::size_t features() const { return gamma.value.shape[0]; }

    Tensor<T> forward(const Tensor<T>& x, bool training) {
        const std::size_t F = features();
        require(x.shape.size() == 2 && x.shape[1] == F,
                "batchnorm: input " + shape_str(x.shape) + " does not match " +
                    std::to_string(F) + " features");
        return training ? forward_train(x) : forward_eval(x);
    }

    Tensor<T> backward(const Tensor<T>& gy, bool training) {
        return training ? backward_train(gy) : backward_eval(gy);
    }

    std::vector<Parameter<T>*> params() { return {&gamma, &beta}; }

  private:
    Tensor<T> forward_train(const Tensor<T>& x) {
        const auto& k = kern::active<T>();
        const std::size_t B = x.shape[0], F = features();
        require(B >= 2, "batchnorm: train mode needs batch size >= 2, got " + std::to_string(B));
        Tensor<T> mean({F});
        for (std::size_t n = 0; n < B; ++n) k.add(F, x.row(n), mean.data());
        k.scale(F, T(1) / static_cast<T>(B), mean.data());
        Tensor<T> var({F});
        Tensor<T> diff({F});
        for (std::size_t n = 0; n < B; ++n) {
            const T* xr = x.row(n);
            for (std::size_t f = 0; f < F; ++f) diff[f] = xr[f] - mean[f];
            for (std::size_t f = 0; f < F; ++f) var[f] += diff[f] * diff[f];
        }
        k.scale(F, T(1) / static_cast<T>(B), var.data());

        inv_std_cache = Tensor<T>({F});
        for (std::size_t f = 0; f < F; ++f)
            inv_std_cache[f] = T(1) / std::sqrt(var[f] + eps);

        xhat_cache = Tensor<T>({B, F});
        Tensor<T> y({B, F});
        for (std::size_t n = 0; n < B; ++n) {
            const T* xr = x.row(n);
            T* hr = xhat_cache.row(n);
            T* yr = y.row(n);
            for (std::size_t f = 0; f < F; ++f) {
                hr[f] = (xr[f] - mean[f]) * inv_std_cache[f];
                yr[f] = gamma.value[f] * hr[f] + beta.value[f];
            }
        }
        for (std::size_t f = 0; f < F; ++f) {
            running_mean[f] = (T(1) - momentum) * running_mean[f] + momentum * mean[f];
            running_var[f] = (T(1) - momentum) * running_var[f] + momentum * var[f];
        }
        return y;
    }

    Tensor<T> forward_eval(const Tensor<T>& x) {
        const std::size_t B = x.shape[0], F = features();
        inv_std_cache = Tensor<T>({F});
        for (std::size_t f = 0; f < F; ++f)
            inv_std_cache[f] = T(1) / std::sqrt(running_var[f] + eps);
        Tensor<T> y({B, F});
        for (std::size_t n = 0; n < B; ++n) {
            const T* xr = x.row(n);
            T* yr = y.row(n);
            for (std::size_t f = 0; f < F; ++f)
                yr[f] = gamma.value[f] * (xr[f] - running_mean[f]) * inv_std_cache[f] +
                        beta.value[f];
        }
        return y;
    }

    Tensor<T> backward_train(const Tensor<T>& gy) {
        const std::size_t B = xhat_cache.shape[0], F = features();
        Tensor<T> sum_g({F});
        Tensor<T> sum_gh({F});
        for (std::size_t n = 0; n < B; ++n) {
            const T* gr = gy.row(n);
            const T* hr = xhat_cache.row(n);
            for (std::size_t f = 0; f < F; ++f) {
                sum_g[f] += gr[f];
                sum_gh[f] += gr[f] * hr[f];
            }
        }
        for (std::size_t f = 0; f < F; ++f) {
            gamma.grad[f] += sum_gh[f];
            beta.grad[f] += sum_g[f];
        }
        Tensor<T> gx({B, F});
        const T invB = T(1) / static_cast<T>(B);
        for (std::size_t n = 0; n < B; ++n) {
            const T* gr = gy.row(n);
            const T* hr = xhat_cache.row(n);
            T* gxr = gx.row(n);
            for (std::size_t f = 0; f < F; ++f) {
                const T term = static_cast<T>(B) * gr[f] - sum_g[f] - hr[f] * sum_gh[f];
                gxr[f] = gamma.value[f] * inv_std_cache[f] * invB * term;
            }
        }
        return gx;
    }

    // Running stats are constants in eval mode, so backward is the affine map.
    Tensor<T> backward_eval(const Tensor<T>& gy) {
        const std::size_t B = gy.shape[0], F = features();
        Tensor<T> gx({B, F});
        for (std::size_t n = 0; n < B; ++n) {
            const T* gr = gy.row(n);
            T* gxr = gx.row(n);
            for (std::size_t f = 0; f < F; ++f)
                gxr[f] = gr[f] * gamma.value[f] * inv_std_cache[f];
        }
        return gx;
    }
};

// ---------------------------------------------------------------------------
// Elementwise activations.

template <class T>
struct Tanh {
    Tensor<T> y_cache;

    Tensor<T> forward(const Tensor<T>& x) {
        Tensor<T> y(x.shape);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
        y_cache = y;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        Tensor<T> gx(gy.shape);
        kern::active<T>().tanh_bwd(gy.size(), y_cache.data(), gy.data(), gx.data());
        return gx;
    }
};

template <class T>
struct ReLU {
    Tensor<T> y_cache;

    Tensor<T> forward(const Tensor<T>& x) {
        Tensor<T> y(x.shape);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
        y_cache = y;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        Tensor<T> gx(gy.shape);
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] = y_cache[i] > T(0) ? gy[i] : T(0);
        return gx;
    }
};

// 2x2 mean pooling, [B,C,H,W] -> [B,C,H/2,W/2]; H and W must be even.

template <class T>
struct MeanPool2x2 {
    Shape in_shape;

    Tensor<T> forward(const Tensor<T>& x) {
        require(x.shape.size() == 4 && x.shape[2] % 2 == 0 && x.shape[3] % 2 == 0,
                "meanpool: input " + shape_str(x.shape) + " must be [B,C,even,even]");
        in_shape = x.shape;
        const std::size_t P = x.shape[0] * x.shape[1];
        const std::size_t H = x.shape[2], W = x.shape[3];
        Tensor<T> y({x.shape[0], x.shape[1], H / 2, W / 2});
        for (std::size_t p = 0; p < P; ++p) {
            const T* xp = x.data() + p * H * W;
            T* yp = y.data() + p * (H / 2) * (W / 2);
            for (std::size_t oy = 0; oy < H / 2; ++oy)
                for (std::size_t ox = 0; ox < W / 2; ++ox) {
                    const T* r0 = xp + (2 * oy) * W + 2 * ox;
                    const T* r1 = r0 + W;
                    yp[oy * (W / 2) + ox] = (r0[0] + r0[1] + r1[0] + r1[1]) * T(0.25);
                }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const std::size_t P = in_shape[0] * in_shape[1];
        const std::size_t H = in_shape[2], W = in_shape[3];
        Tensor<T> gx(in_shape);
        for (std::size_t p = 0; p < P; ++p) {
            const T* gp = gy.data() + p * (H / 2) * (W / 2);
            T* xp = gx.data() + p * H * W;
            for (std::size_t oy = 0; oy < H / 2; ++oy)
                for (std::size_t ox = 0; ox < W / 2; ++ox) {
                    const T g = gp[oy * (W / 2) + ox] * T(0.25);
                    T* r0 = xp + (2 * oy) * W + 2 * ox;
                    T* r1 = r0 + W;
                    r0[0] += g;
                    r0[1] += g;
                    r1[0] += g;
                    r1[1] += g;
                }
        }
        return gx;
    }
};

// ---------------------------------------------------------------------------
// Losses. Each returns the scalar plus the gradient w.r.t. its inputs.

template <class T>
struct LossGrad {
    T loss;
    Tensor<T> grad;
};

// Mean over the batch of -log softmax(logits)[label], max-stabilized.
template <class T>
LossGrad<T> softmax_cross_entropy(const Tensor<T>& logits, const std::vector<std::size_t>& labels) {
    require(logits.shape.size() == 2, "cross_entropy: logits must be [B,C]");
    const std::size_t B = logits.shape[0], C = logits.shape[1];
    require(labels.size() == B, "cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for batch of " + std::to_string(B));
    const auto& k = kern::active<T>();
    LossGrad<T> out{T(0), Tensor<T>({B, C})};
    const T invB = T(1) / static_cast<T>(B);
    std::vector<T> e(C);
    for (std::size_t n = 0; n < B; ++n) {
        require(labels[n] < C, "cross_entropy: label " + std::to_string(labels[n]) +
                                   " out of range [0," + std::to_string(C) + ")");
        const T* lr = logits.row(n);
        const T m = k.max(C, lr);
        T z = T(0);
        for (std::size_t c = 0; c < C; ++c) {
            e[c] = std::exp(lr[c] - m);
            z += e[c];
        }
        out.loss += -(lr[labels[n]] - m - std::log(z));
        T* gr = out.grad.row(n);
        for (std::size_t c = 0; c < C; ++c) gr[c] = e[c] / z * invB;
        gr[labels[n]] -= invB;
    }
    out.loss *= invB;
    return out;
}

// Mean squared error; gradient w.r.t. the first argument (b is the target
// side; its gradient is the negation).
template <class T>
LossGrad<T> mse(const Tensor<T>& a, const Tensor<T>& b) {
    require(a.shape == b.shape, "mse: shape mismatch " + shape_str(a.shape) + " vs " +
                                    shape_str(b.shape));
    const std::size_t n = a.size();
    LossGrad<T> out{T(0), Tensor<T>(a.shape)};
    const T invn = T(1) / static_cast<T>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const T d = a[i] - b[i];
        out.loss += d * d;
        out.grad[i] = T(2) * d * invn;
    }
    out.loss *= invn;
    return out;
}

}  // namespace fewbit
