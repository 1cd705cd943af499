#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "waveop/core/tensor.hpp"
#include "waveop/pde/rbf_fd.hpp"
#include "waveop/pde/trajectory.hpp"

namespace waveop::pde {

struct KleinGordonOptions {
    double dt_fraction = 0.25; // internal dt = dt_fraction * target_spacing
    RbfFdOptions rbf;
    /// Optional forcing g(t, node) added to the right-hand side; used by
    /// verification runs with manufactured solutions.
    std::function<double(double, std::size_t)> forcing;
    /// Optional time-dependent Dirichlet trace; default holds boundary nodes
    /// at their initial values.
    std::function<double(double, std::size_t)> boundary_trace;
};

/// Solve u_tt - Laplace(u) + u^3 = g on a scattered-node domain with
/// Dirichlet boundary, zero initial velocity. The meshfree Laplacian is
/// assembled once (polyharmonic spline r^3, quadratic augmentation, 15-node
/// stencils) and time stepping is explicit leapfrog.
inline Trajectory solve_klein_gordon(const std::vector<double>& u0, const PointCloud& cloud,
                                     double T, std::size_t n_snapshots,
                                     const KleinGordonOptions& opt = {}) {
    const std::size_t n = cloud.coords.size();
    if (u0.size() != n)
        throw ShapeError("solve_klein_gordon: u0 length does not match node count");
    if (n_snapshots < 2) throw ParameterError("solve_klein_gordon: need at least 2 snapshots");
    if (!(T > 0.0)) throw ParameterError("solve_klein_gordon: T must be > 0");

    const StencilOperator lap_op = build_rbf_fd(cloud, RbfOperatorKind::laplacian, opt.rbf);

    const double snap_dt = T / static_cast<double>(n_snapshots);
    const double dt_max = opt.dt_fraction * cloud.target_spacing;
    const std::size_t steps_per_snap =
        static_cast<std::size_t>(std::ceil(snap_dt / dt_max - 1e-12));
    const double dt = snap_dt / static_cast<double>(steps_per_snap);

    std::vector<double> prev(u0), cur(n), next(n), lap(n);

    auto accel = [&](const std::vector<double>& u, double t, std::size_t j) {
        double g = opt.forcing ? opt.forcing(t, j) : 0.0;
        return lap[j] - u[j] * u[j] * u[j] + g;
    };
    auto set_boundary = [&](std::vector<double>& u, double t) {
        for (std::size_t j = 0; j < n; ++j)
            if (cloud.boundary_mask[j])
                u[j] = opt.boundary_trace ? opt.boundary_trace(t, j) : u0[j];
    };

    Trajectory traj;
    traj.space = cloud;
    traj.equation = Equation::klein_gordon;
    traj.times = snapshot_times(T, n_snapshots);
    traj.u = Tensor({n_snapshots, n});

    auto write_snapshot = [&](std::size_t snap, const std::vector<double>& u, double t_now) {
        double* dst = traj.u.v.data() + snap * n;
        for (std::size_t j = 0; j < n; ++j) {
            dst[j] = u[j];
            if (!std::isfinite(dst[j]))
                throw SolverBlowupError(
                    "solve_klein_gordon: non-finite state at t=" + std::to_string(t_now), t_now);
        }
    };

    write_snapshot(0, prev, 0.0);

    lap_op.apply(prev, lap);
    for (std::size_t j = 0; j < n; ++j)
        cur[j] = prev[j] + 0.5 * dt * dt * accel(prev, 0.0, j);
    set_boundary(cur, dt);

    std::size_t step = 1;
    for (std::size_t snap = 1; snap < n_snapshots; ++snap) {
        const std::size_t target = snap * steps_per_snap;
        while (step < target) {
            const double t = dt * static_cast<double>(step);
            lap_op.apply(cur, lap);
            for (std::size_t j = 0; j < n; ++j)
                next[j] = 2.0 * cur[j] - prev[j] + dt * dt * accel(cur, t, j);
            set_boundary(next, t + dt);
            prev.swap(cur);
            cur.swap(next);
            ++step;
        }
        write_snapshot(snap, cur, traj.times[snap]);
    }
    return traj;
}

} // namespace waveop::pde
