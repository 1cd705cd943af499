#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "waveop/core/rng.hpp"
#include "waveop/pde/grids.hpp"

namespace waveop::pde {

/// Star-shaped test domain: interior of r(theta) = 0.4 + 0.05(sin 4t + cos 3t)
/// recentered at (0.5, 0.5), so the unit square is a bounding box.
struct PolarDomain {
    static constexpr double cx = 0.5, cy = 0.5;

    static double radius(double theta) {
        return 0.4 + 0.05 * (std::sin(4.0 * theta) + std::cos(3.0 * theta));
    }
    static double radius_deriv(double theta) {
        return 0.05 * (4.0 * std::cos(4.0 * theta) - 3.0 * std::sin(3.0 * theta));
    }
    static std::array<double, 2> boundary_point(double theta) {
        const double r = radius(theta);
        return {cx + r * std::cos(theta), cy + r * std::sin(theta)};
    }
    /// Signed margin: positive inside, measured as r(theta) - |x - c|.
    static double inside_margin(double x, double y) {
        const double dx = x - cx, dy = y - cy;
        const double rho = std::sqrt(dx * dx + dy * dy);
        const double theta = std::atan2(dy, dx);
        return radius(theta) - rho;
    }
    /// Polygonal area via the shoelace formula on a fine boundary sweep.
    static double area(std::size_t segments = 1 << 14) {
        double a = 0.0;
        auto p0 = boundary_point(0.0);
        for (std::size_t i = 1; i <= segments; ++i) {
            const double th = 2.0 * std::numbers::pi * double(i) / double(segments);
            const auto p1 = boundary_point(th);
            a += p0[0] * p1[1] - p1[0] * p0[1];
            p0 = p1;
        }
        return 0.5 * std::abs(a);
    }
};

/// Scatter nodes over the polar domain: boundary nodes by uniform arc-length
/// subdivision, interior nodes by Poisson-disk dart throwing followed by a
/// few repulsion sweeps. Deterministic for a given seed.
inline PointCloud generate_irregular_nodes(double target_spacing, std::uint64_t seed) {
    if (!(target_spacing > 0.0) || target_spacing >= 0.1)
        throw ParameterError("generate_irregular_nodes: target_spacing must lie in (0, 0.1)");

    PointCloud cloud;
    cloud.target_spacing = target_spacing;

    // Cumulative arc length table for the boundary curve.
    const std::size_t fine = 1 << 14;
    std::vector<double> arclen(fine + 1, 0.0);
    for (std::size_t i = 1; i <= fine; ++i) {
        const double th = 2.0 * std::numbers::pi * (double(i) - 0.5) / double(fine);
        const double r = PolarDomain::radius(th);
        const double dr = PolarDomain::radius_deriv(th);
        arclen[i] = arclen[i - 1] + std::sqrt(r * r + dr * dr) *
                                        (2.0 * std::numbers::pi / double(fine));
    }
    const double total_len = arclen.back();
    const std::size_t n_boundary =
        std::max<std::size_t>(8, static_cast<std::size_t>(std::llround(total_len / target_spacing)));

    for (std::size_t b = 0; b < n_boundary; ++b) {
        const double s = total_len * double(b) / double(n_boundary);
        const auto it = std::lower_bound(arclen.begin(), arclen.end(), s);
        const std::size_t hi = std::max<std::size_t>(1, std::size_t(it - arclen.begin()));
        const double frac = (s - arclen[hi - 1]) / (arclen[hi] - arclen[hi - 1]);
        const double theta =
            2.0 * std::numbers::pi * (double(hi - 1) + frac) / double(fine);
        cloud.coords.push_back(PolarDomain::boundary_point(theta));
        cloud.boundary_mask.push_back(1);
    }

    // Dart throwing. The rejection distance is calibrated below the target
    // spacing so saturation reaches a node density comparable to a
    // quasi-uniform mesh at that spacing.
    const double min_dist = 0.78 * target_spacing;
    const double interior_margin = 0.35 * target_spacing;
    const double area = PolarDomain::area();
    const std::size_t expected = static_cast<std::size_t>(area / (min_dist * min_dist)) + 16;
    const std::size_t attempts = 80 * expected;

    // Uniform hash grid for neighbor queries.
    const double cell = min_dist;
    const std::size_t gdim = static_cast<std::size_t>(std::ceil(1.0 / cell)) + 2;
    std::vector<std::vector<std::size_t>> cells(gdim * gdim);
    auto cell_of = [&](double x, double y) {
        const auto cxi = static_cast<std::size_t>(std::clamp(x / cell + 1.0, 0.0, double(gdim - 1)));
        const auto cyi = static_cast<std::size_t>(std::clamp(y / cell + 1.0, 0.0, double(gdim - 1)));
        return cyi * gdim + cxi;
    };
    auto has_close_neighbor = [&](double x, double y) {
        const long ci = long(std::clamp(x / cell + 1.0, 0.0, double(gdim - 1)));
        const long cj = long(std::clamp(y / cell + 1.0, 0.0, double(gdim - 1)));
        for (long dj = -1; dj <= 1; ++dj)
            for (long di = -1; di <= 1; ++di) {
                const long ii = ci + di, jj = cj + dj;
                if (ii < 0 || jj < 0 || ii >= long(gdim) || jj >= long(gdim)) continue;
                for (std::size_t idx : cells[std::size_t(jj) * gdim + std::size_t(ii)]) {
                    const double dx = cloud.coords[idx][0] - x;
                    const double dy = cloud.coords[idx][1] - y;
                    if (dx * dx + dy * dy < min_dist * min_dist) return true;
                }
            }
        return false;
    };
    for (std::size_t i = 0; i < cloud.coords.size(); ++i)
        cells[cell_of(cloud.coords[i][0], cloud.coords[i][1])].push_back(i);

    GaussianStream rng(derive_seed(seed, "nodes.dart"));
    for (std::size_t a = 0; a < attempts; ++a) {
        const double x = rng.uniform();
        const double y = rng.uniform();
        if (PolarDomain::inside_margin(x, y) < interior_margin) continue;
        if (has_close_neighbor(x, y)) continue;
        cloud.coords.push_back({x, y});
        cloud.boundary_mask.push_back(0);
        cells[cell_of(x, y)].push_back(cloud.coords.size() - 1);
    }

    const std::size_t n_interior = cloud.coords.size() - n_boundary;
    if (n_interior < 10)
        throw ParameterError("generate_irregular_nodes: spacing too coarse, fewer than 10 interior nodes");

    // Repulsion sweeps even out the dart-throwing clusters. Boundary nodes
    // stay fixed; interior nodes are pushed apart and kept inside the domain.
    const double reach = 1.6 * target_spacing;
    for (int sweep = 0; sweep < 5; ++sweep) {
        std::vector<std::array<double, 2>> shift(cloud.coords.size(), {0.0, 0.0});
        for (std::size_t i = n_boundary; i < cloud.coords.size(); ++i) {
            double fx = 0.0, fy = 0.0;
            for (std::size_t j = 0; j < cloud.coords.size(); ++j) {
                if (j == i) continue;
                const double dx = cloud.coords[i][0] - cloud.coords[j][0];
                const double dy = cloud.coords[i][1] - cloud.coords[j][1];
                const double d2 = dx * dx + dy * dy;
                if (d2 >= reach * reach || d2 == 0.0) continue;
                const double d = std::sqrt(d2);
                const double push = (reach - d) / reach;
                fx += push * dx / d;
                fy += push * dy / d;
            }
            shift[i] = {0.12 * target_spacing * fx, 0.12 * target_spacing * fy};
        }
        for (std::size_t i = n_boundary; i < cloud.coords.size(); ++i) {
            double x = cloud.coords[i][0] + shift[i][0];
            double y = cloud.coords[i][1] + shift[i][1];
            if (PolarDomain::inside_margin(x, y) < interior_margin) continue; // reject the move
            cloud.coords[i] = {x, y};
        }
    }
    return cloud;
}

} // namespace waveop::pde
