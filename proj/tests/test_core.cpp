#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <numbers>
#include <vector>

#include "waveop/core/fft.hpp"
#include "waveop/core/hash.hpp"
#include "waveop/core/parallel.hpp"
#include "waveop/core/rng.hpp"
#include "waveop/core/tensor.hpp"

using namespace waveop;

TEST_CASE("fft matches a direct DFT and round-trips", "[core][fft]") {
    const std::size_t n = 64;
    GaussianStream g(7);
    std::vector<std::complex<double>> x(n);
    for (auto& c : x) c = {g.normal(), g.normal()};

    auto y = x;
    Fft plan(n);
    plan.forward(y.data());

    // direct DFT oracle
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = -2.0 * std::numbers::pi * double(k) * double(j) / double(n);
            s += x[j] * std::complex<double>{std::cos(a), std::sin(a)};
        }
        REQUIRE(std::abs(s - y[k]) < 1e-10);
    }

    plan.inverse(y.data());
    for (std::size_t j = 0; j < n; ++j) REQUIRE(std::abs(y[j] - x[j]) < 1e-12);
}

TEST_CASE("fft rejects non power-of-two lengths", "[core][fft]") {
    REQUIRE_THROWS_AS(Fft(48), ParameterError);
    REQUIRE_THROWS_AS(Fft(0), ParameterError);
}

TEST_CASE("spectral derivative of sin(2 pi x)", "[core][fft]") {
    const std::size_t n = 256;
    std::vector<double> u(n);
    for (std::size_t j = 0; j < n; ++j)
        u[j] = std::sin(2.0 * std::numbers::pi * double(j) / double(n));
    auto du = spectral_derivative_periodic(u);
    for (std::size_t j = 0; j < n; ++j) {
        const double expect =
            2.0 * std::numbers::pi * std::cos(2.0 * std::numbers::pi * double(j) / double(n));
        REQUIRE(du[j] == Catch::Approx(expect).margin(1e-9));
    }
}

TEST_CASE("rng streams are reproducible and seed derivation separates components",
          "[core][rng]") {
    GaussianStream a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.normal() == b.normal());

    REQUIRE(derive_seed(1, "x", 0) != derive_seed(1, "x", 1));
    REQUIRE(derive_seed(1, "x", 0) != derive_seed(1, "y", 0));
    REQUIRE(derive_seed(1, "x", 3) == derive_seed(1, "x", 3));

    double z0a, z1a, z0b, z1b;
    gaussian_pair_at(key3(5, 6, 7), z0a, z1a);
    gaussian_pair_at(key3(5, 6, 7), z0b, z1b);
    REQUIRE(z0a == z0b);
    REQUIRE(z1a == z1b);
}

TEST_CASE("gaussian stream has sane moments", "[core][rng]") {
    GaussianStream g(123);
    const int n = 200000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = g.normal();
        s1 += z;
        s2 += z * z;
    }
    REQUIRE(std::abs(s1 / n) < 0.01);
    REQUIRE(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("parallel_for matches serial and propagates exceptions", "[core][parallel]") {
    std::vector<double> a(1000), b(1000);
    auto f = [](std::size_t i) { return std::sin(double(i)) * double(i); };
    parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = f(i); });
    parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = f(i); });
    REQUIRE(a == b);

    REQUIRE_THROWS_AS(
        parallel_for(8, 4,
                     [&](std::size_t i) {
                         if (i == 5) throw ParameterError("boom");
                     }),
        ParameterError);
}

TEST_CASE("tensor shape checks and norms", "[core][tensor]") {
    Tensor t({2, 3});
    REQUIRE(t.size() == 6);
    t.at2(1, 2) = -4.0;
    REQUIRE(t.sup_norm() == 4.0);
    REQUIRE_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), ShapeError);
    REQUIRE(t.all_finite());
    t[0] = std::numeric_limits<double>::quiet_NaN();
    REQUIRE(!t.all_finite());
}

TEST_CASE("fnv1a checksum is stable", "[core][hash]") {
    const char msg[] = "waveop";
    REQUIRE(hex64(fnv1a64(msg, 6)) == hex64(fnv1a64(msg, 6)));
    REQUIRE(fnv1a64(msg, 6) != fnv1a64(msg, 5));
}
