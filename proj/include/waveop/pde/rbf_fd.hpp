#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "waveop/core/tensor.hpp"
#include "waveop/pde/grids.hpp"

namespace waveop::pde {

namespace detail {

/// Dense LU with partial pivoting; returns false on exact singularity.
struct Lu {
    std::vector<double> a; // n x n, row-major, factored in place
    std::vector<std::size_t> piv;
    std::size_t n = 0;

    bool factor(std::vector<double> m, std::size_t dim) {
        a = std::move(m);
        n = dim;
        piv.resize(n);
        std::iota(piv.begin(), piv.end(), std::size_t{0});
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t p = c;
            double best = std::abs(a[c * n + c]);
            for (std::size_t r = c + 1; r < n; ++r) {
                const double v = std::abs(a[r * n + c]);
                if (v > best) {
                    best = v;
                    p = r;
                }
            }
            if (best == 0.0) return false;
            if (p != c) {
                for (std::size_t k = 0; k < n; ++k) std::swap(a[p * n + k], a[c * n + k]);
                std::swap(piv[p], piv[c]);
            }
            const double inv = 1.0 / a[c * n + c];
            for (std::size_t r = c + 1; r < n; ++r) {
                const double f = a[r * n + c] * inv;
                a[r * n + c] = f;
                for (std::size_t k = c + 1; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
            }
        }
        return true;
    }

    void solve(const std::vector<double>& b, std::vector<double>& x) const {
        x.resize(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[piv[i]];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < i; ++k) x[i] -= a[i * n + k] * x[k];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t k = i + 1; k < n; ++k) x[i] -= a[i * n + k] * x[k];
            x[i] /= a[i * n + i];
        }
    }
};

/// 1-norm condition estimate from an explicit inverse; the systems here are
/// tiny (stencil + polynomial block), so exact inversion is affordable.
inline double condition_1norm(const std::vector<double>& m, const Lu& lu, std::size_t n) {
    double norm_a = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += std::abs(m[r * n + c]);
        norm_a = std::max(norm_a, s);
    }
    double norm_inv = 0.0;
    std::vector<double> e(n, 0.0), col;
    for (std::size_t c = 0; c < n; ++c) {
        e.assign(n, 0.0);
        e[c] = 1.0;
        lu.solve(e, col);
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += std::abs(col[r]);
        norm_inv = std::max(norm_inv, s);
    }
    return norm_a * norm_inv;
}

inline std::vector<std::size_t> k_nearest(const PointCloud& cloud, std::size_t center,
                                          std::size_t k) {
    const auto& c = cloud.coords[center];
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(cloud.coords.size());
    for (std::size_t j = 0; j < cloud.coords.size(); ++j) {
        const double dx = cloud.coords[j][0] - c[0];
        const double dy = cloud.coords[j][1] - c[1];
        d.emplace_back(dx * dx + dy * dy, j);
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<long>(k), d.end());
    std::vector<std::size_t> out(k);
    for (std::size_t j = 0; j < k; ++j) out[j] = d[j].second;
    return out;
}

} // namespace detail

/// Sparse stencil weights for a linear differential operator on scattered
/// nodes: row i holds (neighbor index, weight) pairs for node i.
struct StencilOperator {
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;

    void apply(const std::vector<double>& u, std::vector<double>& out) const {
        out.assign(rows.size(), 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double s = 0.0;
            for (const auto& [j, w] : rows[i]) s += w * u[j];
            out[i] = s;
        }
    }
};

struct RbfFdOptions {
    std::size_t stencil_size = 15;
    double max_condition = 1e12;
};

enum class RbfOperatorKind { laplacian, ddx, ddy };

/// Build RBF-FD weights with the polyharmonic spline r^3 and polynomial
/// augmentation up to degree 2 on k nearest neighbors. Weight rows are
/// produced for every node; callers restrict application to interior nodes.
/// The saddle system is solved per node with coordinates shifted to the
/// stencil center for conditioning.
inline StencilOperator build_rbf_fd(const PointCloud& cloud, RbfOperatorKind kind,
                                    const RbfFdOptions& opt = {}) {
    const std::size_t n = cloud.coords.size();
    const std::size_t k = std::min(opt.stencil_size, n);
    if (k < 6) throw ParameterError("build_rbf_fd: stencil smaller than the polynomial basis");
    constexpr std::size_t npoly = 6; // 1, x, y, x^2, xy, y^2

    StencilOperator op;
    op.rows.resize(n);
    const std::size_t m = k + npoly;
    std::vector<double> sys(m * m), rhs(m), w;

    for (std::size_t i = 0; i < n; ++i) {
        const auto nb = detail::k_nearest(cloud, i, k);
        const double x0 = cloud.coords[i][0], y0 = cloud.coords[i][1];

        std::fill(sys.begin(), sys.end(), 0.0);
        for (std::size_t a = 0; a < k; ++a) {
            const double xa = cloud.coords[nb[a]][0] - x0;
            const double ya = cloud.coords[nb[a]][1] - y0;
            for (std::size_t b = 0; b < k; ++b) {
                const double dx = xa - (cloud.coords[nb[b]][0] - x0);
                const double dy = ya - (cloud.coords[nb[b]][1] - y0);
                const double r = std::sqrt(dx * dx + dy * dy);
                sys[a * m + b] = r * r * r;
            }
            const double p[npoly] = {1.0, xa, ya, xa * xa, xa * ya, ya * ya};
            for (std::size_t q = 0; q < npoly; ++q) {
                sys[a * m + (k + q)] = p[q];
                sys[(k + q) * m + a] = p[q];
            }
        }

        // Right-hand side: the operator applied to each basis element at the
        // stencil center (the shifted origin).
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (std::size_t b = 0; b < k; ++b) {
            const double dx = -(cloud.coords[nb[b]][0] - x0);
            const double dy = -(cloud.coords[nb[b]][1] - y0);
            const double r = std::sqrt(dx * dx + dy * dy);
            switch (kind) {
                case RbfOperatorKind::laplacian: rhs[b] = 9.0 * r; break;
                case RbfOperatorKind::ddx: rhs[b] = (r == 0.0) ? 0.0 : 3.0 * r * dx; break;
                case RbfOperatorKind::ddy: rhs[b] = (r == 0.0) ? 0.0 : 3.0 * r * dy; break;
            }
        }
        switch (kind) {
            case RbfOperatorKind::laplacian:
                rhs[k + 3] = 2.0; // d^2/dx^2 of x^2
                rhs[k + 5] = 2.0; // d^2/dy^2 of y^2
                break;
            case RbfOperatorKind::ddx: rhs[k + 1] = 1.0; break;
            case RbfOperatorKind::ddy: rhs[k + 2] = 1.0; break;
        }

        detail::Lu lu;
        std::vector<double> saved = sys;
        if (!lu.factor(std::move(sys), m))
            throw DiscretizationError("build_rbf_fd: singular stencil system at node " +
                                      std::to_string(i));
        sys = std::move(saved);
        const double cond = detail::condition_1norm(sys, lu, m);
        if (cond > opt.max_condition)
            throw DiscretizationError("build_rbf_fd: ill-conditioned stencil at node " +
                                      std::to_string(i) + " (cond ~ " + std::to_string(cond) + ")");
        lu.solve(rhs, w);

        auto& row = op.rows[i];
        row.reserve(k);
        for (std::size_t a = 0; a < k; ++a) row.emplace_back(nb[a], w[a]);
    }
    return op;
}

} // namespace waveop::pde
