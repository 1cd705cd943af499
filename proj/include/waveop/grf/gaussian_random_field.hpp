#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "waveop/core/error.hpp"
#include "waveop/core/parallel.hpp"
#include "waveop/core/rng.hpp"
#include "waveop/core/tensor.hpp"
#include "waveop/pde/grids.hpp"

namespace waveop::grf {

enum class Boundary { periodic1d, neumann2d };

inline std::string boundary_name(Boundary b) {
    return b == Boundary::periodic1d ? "periodic1d" : "neumann2d";
}

/// Sampling spec for the field N(0, sigma^2 (-Laplacian + tau^2 I)^(-gamma)).
struct GrfSpec {
    double sigma2 = 1.0;
    double tau = 1.0;
    double gamma = 2.0;
    Boundary boundary = Boundary::periodic1d;
    std::size_t resolution = 0;
    std::uint64_t seed = 0;

    std::size_t spatial_dim() const { return boundary == Boundary::periodic1d ? 1 : 2; }

    void validate() const {
        if (!(sigma2 > 0.0)) throw ParameterError("grf: sigma2 must be > 0");
        if (!(tau >= 0.0)) throw ParameterError("grf: tau must be >= 0");
        if (!(gamma > static_cast<double>(spatial_dim()) / 2.0))
            throw ParameterError("grf: gamma must exceed spatial_dim/2");
        if (resolution < 2) throw ParameterError("grf: resolution must be >= 2");
    }
};

struct SampledField {
    Tensor values;
    pde::SpaceDesc space;
};

namespace detail {

// Mode budget at a given resolution. Periodic grids exclude the Nyquist
// frequency; closed cosine grids resolve k up to n-1. The constant mode is
// never sampled, so every field has zero spatial mean by construction
// (recorded in dataset metadata as part of the eigenvalue convention).
inline std::size_t max_mode_periodic(std::size_t resolution) { return (resolution - 1) / 2; }
inline std::size_t max_mode_neumann(std::size_t resolution) { return resolution - 1; }

inline std::uint64_t mode_key(std::uint64_t seed, Boundary b, std::uint64_t sample,
                              std::uint64_t k1, std::uint64_t k2 = 0) {
    const std::uint64_t domain = mix64(seed) ^ hash_name(boundary_name(b));
    return key3(domain, sample, (k1 << 24) | k2);
}

inline double mode_std_periodic(const GrfSpec& s, std::size_t k) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
    return std::sqrt(s.sigma2) * std::pow(w * w + s.tau * s.tau, -s.gamma / 2.0);
}

inline double mode_std_neumann(const GrfSpec& s, std::size_t k1, std::size_t k2) {
    const double lam = std::numbers::pi * std::numbers::pi *
                       static_cast<double>(k1 * k1 + k2 * k2);
    return std::sqrt(s.sigma2) * std::pow(lam + s.tau * s.tau, -s.gamma / 2.0);
}

/// Evaluate one truncated expansion on a uniform periodic grid. The mode set
/// is fixed by `max_mode` while the evaluation grid may be finer, so a field
/// can be re-rendered at higher resolution from identical coefficients.
inline std::vector<double> eval_periodic_1d(const GrfSpec& spec, std::uint64_t sample,
                                            std::size_t max_mode, std::size_t eval_res) {
    std::vector<double> u(eval_res, 0.0);
    const double sqrt2 = std::numbers::sqrt2;
    for (std::size_t k = 1; k <= max_mode; ++k) {
        double zc, zs;
        gaussian_pair_at(mode_key(spec.seed, Boundary::periodic1d, sample, k), zc, zs);
        const double a = mode_std_periodic(spec, k) * sqrt2;
        const double cc = a * zc, cs = a * zs;
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
        for (std::size_t j = 0; j < eval_res; ++j) {
            const double x = static_cast<double>(j) / static_cast<double>(eval_res);
            u[j] += cc * std::cos(w * x) + cs * std::sin(w * x);
        }
    }
    return u;
}

/// Coefficient matrix A[k1,k2] of the cosine expansion (zero at (0,0)).
inline Tensor neumann_coeffs(const GrfSpec& spec, std::uint64_t sample, std::size_t max_mode) {
    const std::size_t K = max_mode + 1;
    Tensor A({K, K});
    for (std::size_t k1 = 0; k1 < K; ++k1) {
        for (std::size_t k2 = 0; k2 < K; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            double z0, z1;
            gaussian_pair_at(mode_key(spec.seed, Boundary::neumann2d, sample, k1, k2), z0, z1);
            const double c1 = (k1 == 0) ? 1.0 : std::numbers::sqrt2;
            const double c2 = (k2 == 0) ? 1.0 : std::numbers::sqrt2;
            A.at2(k1, k2) = mode_std_neumann(spec, k1, k2) * c1 * c2 * z0;
        }
    }
    return A;
}

/// cos(pi k x_j) tables; rows are modes, columns grid points of the closed
/// grid with `res` points per axis.
inline Tensor cosine_table(std::size_t K, std::size_t res) {
    Tensor B({K, res});
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < res; ++j) {
            const double x = static_cast<double>(j) / static_cast<double>(res - 1);
            B.at2(k, j) = std::cos(std::numbers::pi * static_cast<double>(k) * x);
        }
    return B;
}

inline Tensor eval_neumann_2d(const GrfSpec& spec, std::uint64_t sample,
                              std::size_t max_mode, std::size_t eval_res) {
    const std::size_t K = max_mode + 1;
    const Tensor A = neumann_coeffs(spec, sample, max_mode);
    const Tensor B = cosine_table(K, eval_res);
    // T[k1, jy] = sum_k2 A[k1,k2] B[k2,jy]
    Tensor T({K, eval_res});
    for (std::size_t k1 = 0; k1 < K; ++k1)
        for (std::size_t k2 = 0; k2 < K; ++k2) {
            const double a = A.at2(k1, k2);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < eval_res; ++j) T.at2(k1, j) += a * B.at2(k2, j);
        }
    Tensor u({eval_res, eval_res});
    for (std::size_t jy = 0; jy < eval_res; ++jy)
        for (std::size_t k1 = 0; k1 < K; ++k1) {
            const double t = T.at2(k1, jy);
            if (t == 0.0) continue;
            for (std::size_t jx = 0; jx < eval_res; ++jx)
                u.v[jy * eval_res + jx] += t * B.at2(k1, jx);
        }
    return u;
}

/// Analytic gradient of the truncated cosine expansion on the grid; used to
/// audit the zero-normal-derivative property of the basis at the boundary.
inline void eval_neumann_gradient(const GrfSpec& spec, std::uint64_t sample,
                                  std::size_t max_mode, std::size_t eval_res,
                                  Tensor& ux, Tensor& uy) {
    const std::size_t K = max_mode + 1;
    const Tensor A = neumann_coeffs(spec, sample, max_mode);
    const Tensor B = cosine_table(K, eval_res);
    Tensor D({K, eval_res}); // -pi k sin(pi k x_j)
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < eval_res; ++j) {
            const double x = static_cast<double>(j) / static_cast<double>(eval_res - 1);
            const double w = std::numbers::pi * static_cast<double>(k);
            D.at2(k, j) = -w * std::sin(w * x);
        }
    ux = Tensor({eval_res, eval_res});
    uy = Tensor({eval_res, eval_res});
    for (std::size_t k1 = 0; k1 < K; ++k1)
        for (std::size_t k2 = 0; k2 < K; ++k2) {
            const double a = A.at2(k1, k2);
            if (a == 0.0) continue;
            for (std::size_t jy = 0; jy < eval_res; ++jy)
                for (std::size_t jx = 0; jx < eval_res; ++jx) {
                    ux.v[jy * eval_res + jx] += a * D.at2(k1, jx) * B.at2(k2, jy);
                    uy.v[jy * eval_res + jx] += a * B.at2(k1, jx) * D.at2(k2, jy);
                }
        }
}

} // namespace detail

/// Draw `count` independent fields on the uniform periodic grid over [0,1).
inline std::vector<SampledField> sample_grf_periodic_1d(const GrfSpec& spec,
                                                        std::size_t count,
                                                        std::size_t workers = 0) {
    spec.validate();
    if (spec.boundary != Boundary::periodic1d)
        throw ParameterError("sample_grf_periodic_1d: spec.boundary must be periodic1d");
    if (workers == 0) workers = default_workers();
    const std::size_t kmax = detail::max_mode_periodic(spec.resolution);
    std::vector<SampledField> out(count);
    parallel_for(count, workers, [&](std::size_t i) {
        auto u = detail::eval_periodic_1d(spec, i, kmax, spec.resolution);
        out[i] = SampledField{Tensor({spec.resolution}, std::move(u)),
                              pde::GridSpec1D{spec.resolution}};
    });
    return out;
}

/// Draw `count` independent fields on the closed tensor grid over [0,1]^2
/// with zero normal derivative at the boundary.
inline std::vector<SampledField> sample_grf_neumann_2d(const GrfSpec& spec,
                                                       std::size_t count,
                                                       std::size_t workers = 0) {
    spec.validate();
    if (spec.boundary != Boundary::neumann2d)
        throw ParameterError("sample_grf_neumann_2d: spec.boundary must be neumann2d");
    if (workers == 0) workers = default_workers();
    const std::size_t kmax = detail::max_mode_neumann(spec.resolution);
    std::vector<SampledField> out(count);
    parallel_for(count, workers, [&](std::size_t i) {
        Tensor u = detail::eval_neumann_2d(spec, i, kmax, spec.resolution);
        out[i] = SampledField{std::move(u),
                              pde::GridSpec2D{spec.resolution, spec.resolution}};
    });
    return out;
}

} // namespace waveop::grf
