#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "waveop/core/tensor.hpp"
#include "waveop/grf/gaussian_random_field.hpp"
#include "waveop/pde/trajectory.hpp"

namespace waveop::pde {

struct SineGordonOptions {
    double cfl_fraction = 0.5; // internal dt = cfl_fraction * h
};

/// Solve u_tt - Laplace(u) + sin u = 0 on [0,1]^2 with homogeneous Neumann
/// boundary, zero initial velocity. Second-order central differences in
/// space (ghost-node mirror closure) and explicit leapfrog in time.
inline Trajectory solve_sine_gordon(const grf::SampledField& u0, double T,
                                    std::size_t n_snapshots,
                                    const SineGordonOptions& opt = {}) {
    const auto* grid = std::get_if<GridSpec2D>(&u0.space);
    if (!grid) throw ParameterError("solve_sine_gordon: initial field must live on a 2D grid");
    if (n_snapshots < 2) throw ParameterError("solve_sine_gordon: need at least 2 snapshots");
    if (!(opt.cfl_fraction > 0.0) || opt.cfl_fraction > 1.0 / std::numbers::sqrt2)
        throw ParameterError("solve_sine_gordon: cfl_fraction violates the stability limit");

    const std::size_t nx = grid->nx, ny = grid->ny;
    const double h = grid->hx();
    if (std::abs(grid->hy() - h) > 1e-15)
        throw ParameterError("solve_sine_gordon: grid must be square");

    const double snap_dt = T / static_cast<double>(n_snapshots);
    const std::size_t steps_per_snap =
        static_cast<std::size_t>(std::ceil(snap_dt / (opt.cfl_fraction * h) - 1e-12));
    const double dt = snap_dt / static_cast<double>(steps_per_snap);

    const std::size_t dof = nx * ny;
    std::vector<double> prev(u0.values.v), cur(dof), next(dof), lap(dof);

    // Mirror index for the ghost-node Neumann closure.
    auto ix = [&](long i, long n) -> std::size_t {
        if (i < 0) return 1;
        if (i >= static_cast<long>(n)) return static_cast<std::size_t>(n - 2);
        return static_cast<std::size_t>(i);
    };
    auto laplacian = [&](const std::vector<double>& u) {
        const double inv_h2 = 1.0 / (h * h);
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) {
                const double c = u[j * nx + i];
                const double l = u[j * nx + ix(long(i) - 1, nx)];
                const double r = u[j * nx + ix(long(i) + 1, nx)];
                const double d = u[ix(long(j) - 1, ny) * nx + i];
                const double t = u[ix(long(j) + 1, ny) * nx + i];
                lap[j * nx + i] = (l + r + d + t - 4.0 * c) * inv_h2;
            }
    };

    Trajectory traj;
    traj.space = *grid;
    traj.equation = Equation::sine_gordon;
    traj.times = snapshot_times(T, n_snapshots);
    traj.u = Tensor({n_snapshots, dof});

    auto write_snapshot = [&](std::size_t snap, const std::vector<double>& u, double t_now) {
        double* dst = traj.u.v.data() + snap * dof;
        for (std::size_t j = 0; j < dof; ++j) {
            dst[j] = u[j];
            if (!std::isfinite(dst[j]))
                throw SolverBlowupError(
                    "solve_sine_gordon: non-finite state at t=" + std::to_string(t_now), t_now);
        }
    };

    write_snapshot(0, prev, 0.0);

    // Taylor start with v0 = 0 keeps second-order accuracy.
    laplacian(prev);
    for (std::size_t j = 0; j < dof; ++j)
        cur[j] = prev[j] + 0.5 * dt * dt * (lap[j] - std::sin(prev[j]));

    std::size_t step = 1; // `cur` holds u at time step*dt
    for (std::size_t snap = 1; snap < n_snapshots; ++snap) {
        const std::size_t target = snap * steps_per_snap;
        while (step < target) {
            laplacian(cur);
            for (std::size_t j = 0; j < dof; ++j)
                next[j] = 2.0 * cur[j] - prev[j] + dt * dt * (lap[j] - std::sin(cur[j]));
            prev.swap(cur);
            cur.swap(next);
            ++step;
        }
        write_snapshot(snap, cur, traj.times[snap]);
    }
    return traj;
}

} // namespace waveop::pde
