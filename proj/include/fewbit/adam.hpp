#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fewbit/layers.hpp"

namespace fewbit {

// Adam with bias correction and optional decoupled weight decay (default 0).
// Parameters join in groups so different parts of a model can run at
// different learning rates.
template <class T>
struct AdamConfig {
    T lr;
    T beta1 = static_cast<T>(0.9);
    T beta2 = static_cast<T>(0.999);
    T eps = static_cast<T>(1e-8);
    T weight_decay = T(0);
};

template <class T>
class Adam {
  public:
    void add_group(std::vector<Parameter<T>*> params, AdamConfig<T> cfg) {
        for (Parameter<T>* p : params) {
            slots_.push_back(Slot{p, Tensor<T>(p->value.shape), Tensor<T>(p->value.shape), cfg});
        }
    }

    std::int64_t step_count() const { return step_; }

    void zero_grad() {
        for (auto& s : slots_) s.param->zero_grad();
    }

    void step() {
        ++step_;
        const double t = static_cast<double>(step_);
        for (auto& s : slots_) {
            const T b1 = s.cfg.beta1, b2 = s.cfg.beta2;
            const T corr1 = static_cast<T>(1.0 - std::pow(static_cast<double>(b1), t));
            const T corr2 = static_cast<T>(1.0 - std::pow(static_cast<double>(b2), t));
            Tensor<T>& p = s.param->value;
            const Tensor<T>& g = s.param->grad;
            for (std::size_t i = 0; i < p.size(); ++i) {
                s.m[i] = b1 * s.m[i] + (T(1) - b1) * g[i];
                s.v[i] = b2 * s.v[i] + (T(1) - b2) * g[i] * g[i];
                const T mhat = s.m[i] / corr1;
                const T vhat = s.v[i] / corr2;
                p[i] -= s.cfg.lr * (mhat / (std::sqrt(vhat) + s.cfg.eps) +
                                    s.cfg.weight_decay * p[i]);
            }
        }
    }

  private:
    struct Slot {
        Parameter<T>* param;
        Tensor<T> m;
        Tensor<T> v;
        AdamConfig<T> cfg;
    };
    std::vector<Slot> slots_;
    std::int64_t step_ = 0;
};

}  // namespace fewbit
