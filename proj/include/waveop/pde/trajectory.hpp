#pragma once

#include <string>
#include <vector>

#include "waveop/core/tensor.hpp"
#include "waveop/pde/grids.hpp"

namespace waveop::pde {

enum class Equation { kdv, sine_gordon, klein_gordon };

inline std::string equation_name(Equation e) {
    switch (e) {
        case Equation::kdv: return "kdv";
        case Equation::sine_gordon: return "sine_gordon";
        case Equation::klein_gordon: return "klein_gordon";
    }
    return "?";
}

inline Equation equation_from_name(const std::string& s) {
    if (s == "kdv") return Equation::kdv;
    if (s == "sine_gordon") return Equation::sine_gordon;
    if (s == "klein_gordon") return Equation::klein_gordon;
    throw ParameterError("unknown equation: " + s);
}

/// One solved sample: snapshots u[t, dof] on a uniform time axis starting at 0.
struct Trajectory {
    SpaceDesc space;
    std::vector<double> times;
    Tensor u; // [n_t, dof]
    Equation equation = Equation::kdv;

    std::size_t n_snapshots() const { return times.size(); }
    std::size_t dof() const { return u.rank() == 2 ? u.shape[1] : 0; }
    const double* snapshot(std::size_t t) const { return u.v.data() + t * dof(); }
    double* snapshot(std::size_t t) { return u.v.data() + t * dof(); }
};

/// Uniform output times t_j = j * T / n on [0, T); the solver grids snapshots
/// at these instants.
inline std::vector<double> snapshot_times(double T, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t j = 0; j < n; ++j)
        t[j] = T * static_cast<double>(j) / static_cast<double>(n);
    return t;
}

} // namespace waveop::pde
