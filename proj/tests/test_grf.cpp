#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "waveop/grf/gaussian_random_field.hpp"

using namespace waveop;
using namespace waveop::grf;

namespace {

GrfSpec kdv_like(std::size_t res, std::uint64_t seed) {
    GrfSpec s;
    s.sigma2 = 2401.0; // 7^4
    s.tau = 7.0;
    s.gamma = 2.5;
    s.boundary = Boundary::periodic1d;
    s.resolution = res;
    s.seed = seed;
    return s;
}

GrfSpec wave_like(std::size_t res, std::uint64_t seed) {
    GrfSpec s;
    s.sigma2 = 1e4;
    s.tau = 8.0;
    s.gamma = 6.0;
    s.boundary = Boundary::neumann2d;
    s.resolution = res;
    s.seed = seed;
    return s;
}

// Independent oracle: evaluate the truncated expansion at an arbitrary point
// by direct summation over the same mode set and coefficients.
double eval_periodic_at(const GrfSpec& spec, std::uint64_t sample, std::size_t kmax,
                        double x) {
    double u = 0.0;
    for (std::size_t k = 1; k <= kmax; ++k) {
        double zc, zs;
        gaussian_pair_at(detail::mode_key(spec.seed, Boundary::periodic1d, sample, k), zc, zs);
        const double a = detail::mode_std_periodic(spec, k) * std::numbers::sqrt2;
        const double w = 2.0 * std::numbers::pi * double(k);
        u += a * (zc * std::cos(w * x) + zs * std::sin(w * x));
    }
    return u;
}

} // namespace

TEST_CASE("periodic fields extend periodically", "[grf]") {
    auto spec = kdv_like(1024, 11);
    auto fields = sample_grf_periodic_1d(spec, 2);
    REQUIRE(fields.size() == 2);
    const std::size_t kmax = detail::max_mode_periodic(spec.resolution);
    for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(fields[i].values.all_finite());
        const double sup = fields[i].values.sup_norm();
        for (double x0 : {0.0, 0.125, 0.69}) {
            const double a = eval_periodic_at(spec, i, kmax, x0);
            const double b = eval_periodic_at(spec, i, kmax, x0 + 1.0);
            REQUIRE(std::abs(a - b) <= 1e-9 * (1.0 + sup));
        }
        // grid rendering agrees with the pointwise oracle
        REQUIRE(fields[i].values[13] ==
                Catch::Approx(eval_periodic_at(spec, i, kmax, 13.0 / 1024.0)).margin(1e-10));
    }
}

TEST_CASE("vanishing variance yields a vanishing field", "[grf]") {
    auto spec = kdv_like(256, 3);
    spec.sigma2 = 1e-30;
    auto fields = sample_grf_periodic_1d(spec, 1);
    REQUIRE(fields[0].values.sup_norm() < 1e-10);
}

TEST_CASE("periodic pointwise variance matches the spectral sum", "[grf][montecarlo]") {
    const std::size_t res = 128;
    const std::size_t draws = 10000;
    auto spec = kdv_like(res, 2024);
    auto fields = sample_grf_periodic_1d(spec, draws);

    // Analytic spectral sum: sum_k sigma_k^2 * (2 cos^2 + 2 sin^2) = 2 sum_k sigma_k^2,
    // identical at every grid point.
    const std::size_t kmax = detail::max_mode_periodic(res);
    double var_expect = 0.0;
    for (std::size_t k = 1; k <= kmax; ++k) {
        const double s = detail::mode_std_periodic(spec, k);
        var_expect += 2.0 * s * s;
    }

    std::vector<double> mean(res, 0.0), second(res, 0.0);
    for (const auto& f : fields)
        for (std::size_t j = 0; j < res; ++j) {
            mean[j] += f.values[j];
            second[j] += f.values[j] * f.values[j];
        }
    std::size_t var_fail = 0, mean_fail = 0;
    const double mean_band = 3.0 * std::sqrt(var_expect) / std::sqrt(double(draws));
    for (std::size_t j = 0; j < res; ++j) {
        mean[j] /= double(draws);
        const double var = second[j] / double(draws) - mean[j] * mean[j];
        if (std::abs(var - var_expect) > 0.05 * var_expect) ++var_fail;
        if (std::abs(mean[j]) > mean_band) ++mean_fail;
    }
    REQUIRE(var_fail == 0);
    // 99.7% band: flag only if exceeded at more than 1% of points.
    REQUIRE(double(mean_fail) <= 0.01 * double(res));
}

TEST_CASE("neumann fields have vanishing normal derivative at edges", "[grf]") {
    auto spec = wave_like(64, 5);
    const std::size_t kmax = detail::max_mode_neumann(spec.resolution);
    auto fields = sample_grf_neumann_2d(spec, 1);
    const double sup = fields[0].values.sup_norm();

    Tensor ux, uy;
    detail::eval_neumann_gradient(spec, 0, kmax, spec.resolution, ux, uy);
    const std::size_t n = spec.resolution;
    for (std::size_t j = 0; j < n; ++j) {
        REQUIRE(std::abs(ux.v[j * n + 0]) <= 1e-8 * sup);
        REQUIRE(std::abs(ux.v[j * n + (n - 1)]) <= 1e-8 * sup);
        REQUIRE(std::abs(uy.v[0 * n + j]) <= 1e-8 * sup);
        REQUIRE(std::abs(uy.v[(n - 1) * n + j]) <= 1e-8 * sup);
    }
}

TEST_CASE("count=0 returns an empty list", "[grf]") {
    auto spec = wave_like(16, 1);
    REQUIRE(sample_grf_neumann_2d(spec, 0).empty());
}

TEST_CASE("neumann pointwise variance matches the spectral sum", "[grf][montecarlo]") {
    const std::size_t res = 32;
    const std::size_t draws = 10000;
    auto spec = wave_like(res, 77);
    auto fields = sample_grf_neumann_2d(spec, draws);

    // Analytic pointwise variance, position dependent.
    const std::size_t kmax = detail::max_mode_neumann(res);
    std::vector<double> var_expect(res * res, 0.0);
    for (std::size_t k1 = 0; k1 <= kmax; ++k1)
        for (std::size_t k2 = 0; k2 <= kmax; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const double s = detail::mode_std_neumann(spec, k1, k2);
            const double c1 = (k1 == 0) ? 1.0 : std::numbers::sqrt2;
            const double c2 = (k2 == 0) ? 1.0 : std::numbers::sqrt2;
            for (std::size_t jy = 0; jy < res; ++jy)
                for (std::size_t jx = 0; jx < res; ++jx) {
                    const double x = double(jx) / double(res - 1);
                    const double y = double(jy) / double(res - 1);
                    const double b = c1 * c2 * std::cos(std::numbers::pi * double(k1) * x) *
                                     std::cos(std::numbers::pi * double(k2) * y);
                    var_expect[jy * res + jx] += s * s * b * b;
                }
        }

    std::vector<double> second(res * res, 0.0);
    for (const auto& f : fields)
        for (std::size_t j = 0; j < res * res; ++j) second[j] += f.values[j] * f.values[j];
    std::size_t fail = 0;
    for (std::size_t j = 0; j < res * res; ++j) {
        const double var = second[j] / double(draws);
        if (std::abs(var - var_expect[j]) > 0.05 * var_expect[j]) ++fail;
    }
    REQUIRE(fail == 0);
}

TEST_CASE("same spec and seed reproduce bitwise, parallel equals serial", "[grf]") {
    auto spec = kdv_like(256, 99);
    auto a = sample_grf_periodic_1d(spec, 8, 1);
    auto b = sample_grf_periodic_1d(spec, 8, 4);
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(a[i].values.v == b[i].values.v);

    auto spec2 = wave_like(24, 99);
    auto c = sample_grf_neumann_2d(spec2, 3, 1);
    auto d = sample_grf_neumann_2d(spec2, 3, 3);
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(c[i].values.v == d[i].values.v);
}

TEST_CASE("resampling at double resolution preserves shared points", "[grf]") {
    // 1D: same coefficients, finer evaluation grid.
    auto spec = kdv_like(128, 31);
    const std::size_t kmax = detail::max_mode_periodic(spec.resolution);
    auto coarse = detail::eval_periodic_1d(spec, 0, kmax, 128);
    auto fine = detail::eval_periodic_1d(spec, 0, kmax, 256);
    for (std::size_t j = 0; j < 128; ++j)
        REQUIRE(std::abs(coarse[j] - fine[2 * j]) < 1e-12);

    // 2D: closed grid refinement keeps shared points at even indices.
    auto spec2 = wave_like(33, 31);
    const std::size_t kmax2 = detail::max_mode_neumann(spec2.resolution);
    Tensor c2 = detail::eval_neumann_2d(spec2, 0, kmax2, 33);
    Tensor f2 = detail::eval_neumann_2d(spec2, 0, kmax2, 65);
    for (std::size_t jy = 0; jy < 33; ++jy)
        for (std::size_t jx = 0; jx < 33; ++jx)
            REQUIRE(std::abs(c2.v[jy * 33 + jx] - f2.v[(2 * jy) * 65 + 2 * jx]) < 1e-12);
}

TEST_CASE("invalid specs are rejected", "[grf]") {
    auto spec = kdv_like(128, 1);
    spec.sigma2 = 0.0;
    REQUIRE_THROWS_AS(sample_grf_periodic_1d(spec, 1), ParameterError);

    spec = kdv_like(128, 1);
    spec.gamma = 0.4; // <= dim/2
    REQUIRE_THROWS_AS(sample_grf_periodic_1d(spec, 1), ParameterError);

    spec = kdv_like(1, 1);
    REQUIRE_THROWS_AS(sample_grf_periodic_1d(spec, 1), ParameterError);

    spec = kdv_like(128, 1);
    REQUIRE_THROWS_AS(sample_grf_neumann_2d(spec, 1), ParameterError);

    auto w = wave_like(32, 1);
    w.gamma = 0.9; // <= dim/2 for 2D
    REQUIRE_THROWS_AS(sample_grf_neumann_2d(w, 1), ParameterError);
}
