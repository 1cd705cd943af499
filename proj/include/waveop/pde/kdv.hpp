#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "waveop/core/fft.hpp"
#include "waveop/core/tensor.hpp"
#include "waveop/grf/gaussian_random_field.hpp"
#include "waveop/pde/trajectory.hpp"

namespace waveop::pde {

namespace detail {

// phi functions for exponential integrators: phi1 = (e^z - 1)/z etc.
// Closed forms cancel catastrophically near z = 0, so small arguments use the
// Taylor series. z is purely imaginary here (dispersive symbol).
inline std::complex<double> phi_series(std::complex<double> z, int order) {
    std::complex<double> term = 1.0, sum = 0.0;
    double fact = 1.0;
    for (int j = 1; j <= order; ++j) fact *= j;
    // phi_p(z) = sum_{j>=0} z^j / (j+p)!
    double denom = fact;
    for (int j = 0; j < 24; ++j) {
        sum += term / denom;
        term *= z;
        denom *= (j + order + 1);
    }
    return sum;
}

inline std::complex<double> phi1(std::complex<double> z) {
    if (std::abs(z) < 0.5) return phi_series(z, 1);
    return (std::exp(z) - 1.0) / z;
}
inline std::complex<double> phi2(std::complex<double> z) {
    if (std::abs(z) < 0.5) return phi_series(z, 2);
    return (std::exp(z) - 1.0 - z) / (z * z);
}
inline std::complex<double> phi3(std::complex<double> z) {
    if (std::abs(z) < 0.5) return phi_series(z, 3);
    return (std::exp(z) - 1.0 - z - 0.5 * z * z) / (z * z * z);
}

} // namespace detail

struct KdvOptions {
    double max_internal_dt = 1e-4;
};

/// Solve u_t + u u_x + delta^2 u_xxx = 0 on the periodic unit interval with
/// Fourier collocation and fourth-order exponential time differencing.
/// Nonlinear products are 2/3-rule dealiased. Snapshots are written at
/// n_snapshots uniform instants on [0, T).
inline Trajectory solve_kdv(const grf::SampledField& u0, double delta, double T,
                            std::size_t n_snapshots, const KdvOptions& opt = {}) {
    const auto* grid = std::get_if<GridSpec1D>(&u0.space);
    if (!grid) throw ParameterError("solve_kdv: initial field must live on a periodic 1D grid");
    if (!(delta > 0.0)) throw ParameterError("solve_kdv: delta must be > 0");
    if (n_snapshots < 2) throw ParameterError("solve_kdv: need at least 2 snapshots");
    if (!(T > 0.0)) throw ParameterError("solve_kdv: T must be > 0");

    const std::size_t n = grid->n;
    const Fft plan(n);
    const double snap_dt = T / static_cast<double>(n_snapshots);
    const std::size_t steps_per_snap =
        static_cast<std::size_t>(std::ceil(snap_dt / opt.max_internal_dt - 1e-12));
    const double h = snap_dt / static_cast<double>(steps_per_snap);

    // Dispersive symbol L_k = i delta^2 k^3 and the ETDRK4 coefficient tables.
    std::vector<std::complex<double>> E(n), E2(n), Q(n), alpha(n), beta(n), gamma(n);
    std::vector<std::complex<double>> deriv_half(n); // -0.5 i k, dealiased
    const std::size_t kcut = n / 3; // 2/3 rule
    for (std::size_t idx = 0; idx < n; ++idx) {
        const double k_signed =
            (idx <= n / 2) ? static_cast<double>(idx) : static_cast<double>(idx) - static_cast<double>(n);
        const double k = 2.0 * std::numbers::pi * k_signed;
        const std::complex<double> L{0.0, delta * delta * k * k * k};
        const std::complex<double> z = L * h;
        E[idx] = std::exp(z);
        E2[idx] = std::exp(0.5 * z);
        Q[idx] = 0.5 * h * detail::phi1(0.5 * z);
        const auto p1 = detail::phi1(z), p2 = detail::phi2(z), p3 = detail::phi3(z);
        alpha[idx] = h * (p1 - 3.0 * p2 + 4.0 * p3);
        beta[idx] = h * (p2 - 2.0 * p3);
        gamma[idx] = h * (4.0 * p3 - p2);
        const bool keep = std::abs(k_signed) <= static_cast<double>(kcut);
        deriv_half[idx] = keep ? std::complex<double>{0.0, -0.5 * k} : 0.0;
    }

    std::vector<std::complex<double>> v(n), a(n), b(n), c(n);
    std::vector<std::complex<double>> Nu(n), Na(n), Nb(n), Nc(n), work(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = {u0.values[j], 0.0};
    plan.forward(v.data());

    // N(v) = -0.5 i k * FFT(real(IFFT(v))^2), dealiased.
    auto eval_nonlinear = [&](const std::vector<std::complex<double>>& spec,
                              std::vector<std::complex<double>>& out) {
        work = spec;
        plan.inverse(work.data());
        for (std::size_t j = 0; j < n; ++j) {
            const double uj = work[j].real();
            work[j] = {uj * uj, 0.0};
        }
        plan.forward(work.data());
        for (std::size_t j = 0; j < n; ++j) out[j] = deriv_half[j] * work[j];
    };

    Trajectory traj;
    traj.space = *grid;
    traj.equation = Equation::kdv;
    traj.times = snapshot_times(T, n_snapshots);
    traj.u = Tensor({n_snapshots, n});

    auto write_snapshot = [&](std::size_t snap, double t_now) {
        work = v;
        plan.inverse(work.data());
        double* dst = traj.u.v.data() + snap * n;
        for (std::size_t j = 0; j < n; ++j) {
            dst[j] = work[j].real();
            if (!std::isfinite(dst[j]))
                throw SolverBlowupError("solve_kdv: non-finite state at t=" + std::to_string(t_now),
                                        t_now);
        }
    };

    write_snapshot(0, 0.0);
    for (std::size_t snap = 1; snap < n_snapshots; ++snap) {
        for (std::size_t s = 0; s < steps_per_snap; ++s) {
            eval_nonlinear(v, Nu);
            for (std::size_t j = 0; j < n; ++j) a[j] = E2[j] * v[j] + Q[j] * Nu[j];
            eval_nonlinear(a, Na);
            for (std::size_t j = 0; j < n; ++j) b[j] = E2[j] * v[j] + Q[j] * Na[j];
            eval_nonlinear(b, Nb);
            for (std::size_t j = 0; j < n; ++j) c[j] = E2[j] * a[j] + Q[j] * (2.0 * Nb[j] - Nu[j]);
            eval_nonlinear(c, Nc);
            for (std::size_t j = 0; j < n; ++j)
                v[j] = E[j] * v[j] + alpha[j] * Nu[j] + 2.0 * beta[j] * (Na[j] + Nb[j]) +
                       gamma[j] * Nc[j];
        }
        write_snapshot(snap, traj.times[snap]);
    }
    return traj;
}

/// First three conserved integrals of the KdV flow on [0,1):
/// E1 = int u, E2 = int u^2, E3 = int(u^3/3 - (u_x)^2) with a spectral u_x.
struct KdvInvariants {
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
};

inline KdvInvariants conserved_quantities_kdv(const std::vector<double>& u) {
    if (u.empty()) throw ParameterError("conserved_quantities_kdv: empty field");
    for (double x : u)
        if (!std::isfinite(x)) throw ParameterError("conserved_quantities_kdv: non-finite input");
    const double w = 1.0 / static_cast<double>(u.size());
    KdvInvariants q;
    const auto du = spectral_derivative_periodic(u);
    for (std::size_t j = 0; j < u.size(); ++j) {
        q.e1 += u[j] * w;
        q.e2 += u[j] * u[j] * w;
        q.e3 += (u[j] * u[j] * u[j] / 3.0 - du[j] * du[j]) * w;
    }
    return q;
}

inline KdvInvariants conserved_quantities_kdv(const grf::SampledField& f) {
    if (!std::holds_alternative<GridSpec1D>(f.space))
        throw ParameterError("conserved_quantities_kdv: field must be periodic 1D");
    return conserved_quantities_kdv(f.values.v);
}

} // namespace waveop::pde
