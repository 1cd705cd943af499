#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <vector>

#include "waveop/core/error.hpp"

namespace waveop {

/// Dense row-major tensor of doubles. Deliberately minimal: shape + flat
/// storage, with a few indexing helpers. All numerical kernels in this
/// library operate on the flat data directly.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        v.assign(numel(shape), 0.0);
    }
    Tensor(std::vector<std::size_t> s, std::vector<double> data)
        : shape(std::move(s)), v(std::move(data)) {
        if (v.size() != numel(shape))
            throw ShapeError("tensor data length does not match shape");
    }

    static std::size_t numel(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

    static Tensor full(std::vector<std::size_t> s, double value) {
        Tensor t(std::move(s));
        for (auto& x : t.v) x = value;
        return t;
    }

    static Tensor scalar(double value) { return Tensor({1}, {value}); }

    std::size_t size() const { return v.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    double& at2(std::size_t i, std::size_t j) { return v[i * shape[1] + j]; }
    double at2(std::size_t i, std::size_t j) const { return v[i * shape[1] + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }

    double sup_norm() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }

    double l2_norm() const {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < shape.size(); ++i)
            os << (i ? "," : "") << shape[i];
        os << "]";
        return os.str();
    }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shapes " + a.shape_str() + " vs " +
                         b.shape_str());
}

/// Complex tensor stored as separate real/imaginary planes (structure-of-
/// arrays keeps the hot loops vectorizable).
struct CTensor {
    std::vector<std::size_t> shape;
    std::vector<double> re, im;

    CTensor() = default;
    explicit CTensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        const std::size_t n = Tensor::numel(shape);
        re.assign(n, 0.0);
        im.assign(n, 0.0);
    }

    std::size_t size() const { return re.size(); }
};

} // namespace waveop
