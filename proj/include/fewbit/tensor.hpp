#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fewbit {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// Dense row-major n-d array. The single value carrier for the whole library.
template <class T>
struct Tensor {
    Shape shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(Shape s, T fill = T(0)) : shape(std::move(s)), v(numel(shape), fill) {}
    Tensor(Shape s, std::vector<T> values) : shape(std::move(s)), v(std::move(values)) {
        if (v.size() != numel(shape))
            throw std::runtime_error("tensor: " + std::to_string(v.size()) +
                                     " values do not fill shape " + shape_str(shape));
    }

    std::size_t size() const { return v.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
    T* data() { return v.data(); }
    const T* data() const { return v.data(); }

    T& operator[](std::size_t i) { return v[i]; }
    const T& operator[](std::size_t i) const { return v[i]; }

    T& at2(std::size_t i, std::size_t j) { return v[i * shape[1] + j]; }
    const T& at2(std::size_t i, std::size_t j) const { return v[i * shape[1] + j]; }

    T* row(std::size_t i) { return v.data() + i * (v.size() / shape[0]); }
    const T* row(std::size_t i) const { return v.data() + i * (v.size() / shape[0]); }

    void fill(T x) { std::fill(v.begin(), v.end(), x); }
    void zero() { fill(T(0)); }

    Tensor reshaped(Shape s) const {
        if (numel(s) != v.size())
            throw std::runtime_error("reshape: cannot view " + shape_str(shape) + " as " +
                                     shape_str(s));
        Tensor out = *this;
        out.shape = std::move(s);
        return out;
    }

    bool all_finite() const {
        for (const T& x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

}  // namespace fewbit
