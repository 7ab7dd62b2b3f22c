#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fewbit/layers.hpp"

namespace fewbit {

// Central finite differences against analytic gradients. loss_fn evaluates
// the scalar loss from the current parameter values; grad_fn runs
// forward+backward and leaves gradients in each parameter. Near-zero pairs
// (both below abs_floor) compare as exact matches, otherwise the error is
// |a-n| / max(|a|,|n|).
template <class T>
struct GradCheckEntry {
    std::string param;
    T max_rel_err = T(0);
    std::size_t worst_index = 0;
    bool finite = true;
};

template <class T>
struct GradCheckReport {
    std::vector<GradCheckEntry<T>> entries;
    T max_rel_err = T(0);
    bool all_finite = true;

    bool pass(T tol) const { return all_finite && max_rel_err <= tol; }
};

template <class T>
GradCheckReport<T> grad_check(const std::vector<Parameter<T>*>& params,
                              const std::function<T()>& loss_fn,
                              const std::function<void()>& grad_fn,
                              T step = static_cast<T>(1e-5),
                              T abs_floor = static_cast<T>(1e-7)) {
    for (Parameter<T>* p : params) p->zero_grad();
    grad_fn();

    std::vector<Tensor<T>> analytic;
    analytic.reserve(params.size());
    for (Parameter<T>* p : params) analytic.push_back(p->grad);

    GradCheckReport<T> report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter<T>& p = *params[pi];
        GradCheckEntry<T> entry;
        entry.param = p.name;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const T saved = p.value[i];
            p.value[i] = saved + step;
            const T up = loss_fn();
            p.value[i] = saved - step;
            const T down = loss_fn();
            p.value[i] = saved;
            const T numeric = (up - down) / (T(2) * step);
            const T a = analytic[pi][i];
            if (!std::isfinite(numeric) || !std::isfinite(a)) {
                entry.finite = false;
                entry.worst_index = i;
                report.all_finite = false;
                break;
            }
            const T denom = std::max(std::abs(a), std::abs(numeric));
            const T err = denom < abs_floor ? T(0) : std::abs(a - numeric) / denom;
            if (err > entry.max_rel_err) {
                entry.max_rel_err = err;
                entry.worst_index = i;
            }
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace fewbit
