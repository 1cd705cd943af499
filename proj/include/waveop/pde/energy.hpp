#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "waveop/core/tensor.hpp"
#include "waveop/pde/node_cloud.hpp"
#include "waveop/pde/rbf_fd.hpp"
#include "waveop/pde/trajectory.hpp"

namespace waveop::pde {

/// Trapezoid quadrature weights on the closed tensor grid (corner 1/4, edge
/// 1/2, interior 1), scaled by the cell area. Integrates constants exactly.
inline std::vector<double> grid2d_quadrature(const GridSpec2D& g) {
    std::vector<double> w(g.dof());
    const double cell = g.hx() * g.hy();
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            double f = 1.0;
            if (i == 0 || i == g.nx - 1) f *= 0.5;
            if (j == 0 || j == g.ny - 1) f *= 0.5;
            w[g.at(i, j)] = f * cell;
        }
    return w;
}

/// Equal-weight node quadrature: |D| / N per node.
inline std::vector<double> cloud_quadrature(const PointCloud& cloud) {
    const double area = PolarDomain::area();
    return std::vector<double>(cloud.dof(), area / static_cast<double>(cloud.dof()));
}

/// Central-difference gradient on the grid (one-sided at edges).
inline void grid2d_gradient(const GridSpec2D& g, const std::vector<double>& u,
                            std::vector<double>& ux, std::vector<double>& uy) {
    ux.assign(g.dof(), 0.0);
    uy.assign(g.dof(), 0.0);
    const double hx = g.hx(), hy = g.hy();
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const std::size_t c = g.at(i, j);
            if (i == 0)
                ux[c] = (u[g.at(1, j)] - u[g.at(0, j)]) / hx;
            else if (i == g.nx - 1)
                ux[c] = (u[g.at(g.nx - 1, j)] - u[g.at(g.nx - 2, j)]) / hx;
            else
                ux[c] = (u[g.at(i + 1, j)] - u[g.at(i - 1, j)]) / (2.0 * hx);
            if (j == 0)
                uy[c] = (u[g.at(i, 1)] - u[g.at(i, 0)]) / hy;
            else if (j == g.ny - 1)
                uy[c] = (u[g.at(i, g.ny - 1)] - u[g.at(i, g.ny - 2)]) / hy;
            else
                uy[c] = (u[g.at(i, j + 1)] - u[g.at(i, j - 1)]) / (2.0 * hy);
        }
}

/// Gradient operators for energy computation on a point cloud, built once and
/// reused across snapshots.
struct CloudGradient {
    StencilOperator ddx, ddy;

    explicit CloudGradient(const PointCloud& cloud, const RbfFdOptions& opt = {})
        : ddx(build_rbf_fd(cloud, RbfOperatorKind::ddx, opt)),
          ddy(build_rbf_fd(cloud, RbfOperatorKind::ddy, opt)) {}
};

/// Discrete wave energy  E = int (u_t)^2 + |grad u|^2 + 2 F(u) dx.
inline double wave_energy(const std::vector<double>& u_t, const std::vector<double>& u,
                          const GridSpec2D& grid, const std::function<double(double)>& F) {
    if (u_t.size() != grid.dof() || u.size() != grid.dof())
        throw ShapeError("wave_energy: dof mismatch with grid");
    const auto w = grid2d_quadrature(grid);
    std::vector<double> ux, uy;
    grid2d_gradient(grid, u, ux, uy);
    double e = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
        e += w[j] * (u_t[j] * u_t[j] + ux[j] * ux[j] + uy[j] * uy[j] + 2.0 * F(u[j]));
    return e;
}

inline double wave_energy(const std::vector<double>& u_t, const std::vector<double>& u,
                          const PointCloud& cloud, const std::function<double(double)>& F,
                          const CloudGradient& grad) {
    if (u_t.size() != cloud.dof() || u.size() != cloud.dof())
        throw ShapeError("wave_energy: dof mismatch with cloud");
    const auto w = cloud_quadrature(cloud);
    std::vector<double> ux, uy;
    grad.ddx.apply(u, ux);
    grad.ddy.apply(u, uy);
    double e = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
        e += w[j] * (u_t[j] * u_t[j] + ux[j] * ux[j] + uy[j] * uy[j] + 2.0 * F(u[j]));
    return e;
}

inline double wave_energy(const std::vector<double>& u_t, const std::vector<double>& u,
                          const PointCloud& cloud, const std::function<double(double)>& F) {
    return wave_energy(u_t, u, cloud, F, CloudGradient(cloud));
}

/// Snapshot velocities by central difference quotients of the stored
/// trajectory (one-sided at the ends).
inline std::vector<double> snapshot_velocity(const Trajectory& traj, std::size_t t) {
    const std::size_t dof = traj.dof();
    const std::size_t nt = traj.n_snapshots();
    std::vector<double> v(dof);
    const double dt = traj.times[1] - traj.times[0];
    const double* u = traj.u.v.data();
    if (t == 0) {
        for (std::size_t j = 0; j < dof; ++j) v[j] = (u[dof + j] - u[j]) / dt;
    } else if (t == nt - 1) {
        for (std::size_t j = 0; j < dof; ++j)
            v[j] = (u[t * dof + j] - u[(t - 1) * dof + j]) / dt;
    } else {
        for (std::size_t j = 0; j < dof; ++j)
            v[j] = (u[(t + 1) * dof + j] - u[(t - 1) * dof + j]) / (2.0 * dt);
    }
    return v;
}

/// Energy trace of a stored wave trajectory with potential F.
inline std::vector<double> trajectory_energy(const Trajectory& traj,
                                             const std::function<double(double)>& F) {
    std::vector<double> e(traj.n_snapshots());
    const auto* grid = std::get_if<GridSpec2D>(&traj.space);
    const auto* cloud = std::get_if<PointCloud>(&traj.space);
    std::unique_ptr<CloudGradient> grad;
    if (cloud) grad = std::make_unique<CloudGradient>(*cloud);
    for (std::size_t t = 0; t < traj.n_snapshots(); ++t) {
        std::vector<double> u(traj.snapshot(t), traj.snapshot(t) + traj.dof());
        const auto v = snapshot_velocity(traj, t);
        if (grid)
            e[t] = wave_energy(v, u, *grid, F);
        else if (cloud)
            e[t] = wave_energy(v, u, *cloud, F, *grad);
        else
            throw ParameterError("trajectory_energy: unsupported space");
    }
    return e;
}

} // namespace waveop::pde
