#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "waveop/data/store.hpp"
#include "waveop/data/windows.hpp"
#include "waveop/grf/gaussian_random_field.hpp"
#include "waveop/pde/kdv.hpp"

using namespace waveop;
using namespace waveop::data;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("waveop_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::vector<pde::Trajectory> tiny_kdv_set(std::size_t n, std::size_t res,
                                          std::size_t n_t, std::uint64_t seed,
                                          double T = 0.1) {
    grf::GrfSpec spec;
    spec.sigma2 = 2401.0;
    spec.tau = 7.0;
    spec.gamma = 2.5;
    spec.boundary = grf::Boundary::periodic1d;
    spec.resolution = res;
    spec.seed = seed;
    auto fields = grf::sample_grf_periodic_1d(spec, n);
    std::vector<pde::Trajectory> out;
    pde::KdvOptions opt{.max_internal_dt = 2e-3}; // coarse: dataset plumbing test only
    for (auto& f : fields) out.push_back(pde::solve_kdv(f, 0.01, T, n_t, opt));
    return out;
}

StoreMeta kdv_meta(std::uint64_t seed) {
    StoreMeta m;
    m.equation = pde::Equation::kdv;
    m.T = 0.1;
    m.base_seed = seed;
    m.grf = json{{"sigma2", 2401.0}, {"tau", 7.0}, {"gamma", 2.5}};
    m.solver = json{{"delta", 0.01}};
    return m;
}

} // namespace

TEST_CASE("store round-trips bitwise", "[dataset]") {
    TempDir dir;
    auto trajs = tiny_kdv_set(3, 64, 20, 42);
    auto written = write_store(trajs, kdv_meta(42), dir.path.string());
    auto loaded = read_store(dir.path.string());

    REQUIRE(loaded.n_samples() == 3);
    REQUIRE(loaded.n_snapshots() == 20);
    REQUIRE(loaded.dof() == 64);
    REQUIRE(loaded.u.v == written.u.v); // f32 round-trip is exact
    REQUIRE(loaded.times == written.times);
    REQUIRE(loaded.meta.eigenvalue_convention == written.meta.eigenvalue_convention);
}

TEST_CASE("store rejects truncated arrays", "[dataset]") {
    TempDir dir;
    auto trajs = tiny_kdv_set(2, 32, 12, 7);
    write_store(trajs, kdv_meta(7), dir.path.string());
    // truncate u.f32
    const auto upath = dir.path / "u.f32";
    const auto size = fs::file_size(upath);
    fs::resize_file(upath, size - 16);
    REQUIRE_THROWS_AS(read_store(dir.path.string()), CorruptionError);
}

TEST_CASE("store rejects inconsistent shapes on write", "[dataset]") {
    TempDir dir;
    auto trajs = tiny_kdv_set(2, 32, 12, 7);
    auto other = tiny_kdv_set(1, 64, 12, 8);
    trajs.push_back(other[0]);
    REQUIRE_THROWS_AS(write_store(trajs, kdv_meta(7), dir.path.string()), ShapeError);
    REQUIRE(!fs::exists(dir.path / "meta.json"));
}

TEST_CASE("array payload is exactly N*n_t*dof*4 bytes", "[dataset]") {
    TempDir dir;
    const std::size_t N = 5, n_t = 16, dof = 32;
    auto trajs = tiny_kdv_set(N, dof, n_t, 3);
    write_store(trajs, kdv_meta(3), dir.path.string());
    REQUIRE(fs::file_size(dir.path / "u.f32") == N * n_t * dof * 4);
    REQUIRE(fs::file_size(dir.path / "t.f64") == n_t * 8);
}

TEST_CASE("window pairs: forced pair when n_t = 2l", "[dataset]") {
    TempDir dir;
    auto trajs = tiny_kdv_set(2, 32, 20, 5);
    auto store = write_store(trajs, kdv_meta(5), dir.path.string());

    SamplingPolicy p{SamplingMode::fixed_start, 10, 0, 0, 1};
    auto pairs = make_window_pairs(store, p);
    REQUIRE(pairs.size() == 2);
    for (const auto& pr : pairs) {
        REQUIRE(pr.start_index == 0);
        REQUIRE(pr.input.shape == std::vector<std::size_t>{10, 32});
        // windows are verbatim slices
        for (std::size_t s = 0; s < 10; ++s)
            for (std::size_t j = 0; j < 32; ++j) {
                REQUIRE(pr.input.v[s * 32 + j] == store.snapshot(pr.trajectory, s)[j]);
                REQUIRE(pr.target.v[s * 32 + j] == store.snapshot(pr.trajectory, 10 + s)[j]);
            }
    }
}

TEST_CASE("window pairs: local_random start indices span the requested range",
          "[dataset]") {
    // 100 snapshots on [0, 1): local range [0.50, 0.80] -> indices 50..80
    TempDir dir;
    auto trajs = tiny_kdv_set(40, 16, 100, 9, 1.0);
    auto store = write_store(trajs, kdv_meta(9), dir.path.string());

    SamplingPolicy p{SamplingMode::local_random, 10, 0.50, 0.80, 11};
    const auto starts = feasible_starts(p, store.times);
    REQUIRE(starts.front() == 50);
    REQUIRE(starts.back() == 80);
    REQUIRE(starts.size() == 31);

    auto pairs = make_window_pairs(store, p);
    for (const auto& pr : pairs) {
        REQUIRE(pr.start_index >= 50);
        REQUIRE(pr.start_index <= 80);
    }

    // empty feasible set is a parameter error
    SamplingPolicy bad{SamplingMode::local_random, 10, 0.95, 0.99, 11};
    REQUIRE_THROWS_AS(make_window_pairs(store, bad), ParameterError);
}

TEST_CASE("window pairs: deterministic given seed", "[dataset]") {
    TempDir dir;
    auto trajs = tiny_kdv_set(10, 16, 60, 2);
    auto store = write_store(trajs, kdv_meta(2), dir.path.string());
    SamplingPolicy p{SamplingMode::global_random, 10, 0, 0, 77};
    auto a = make_window_pairs(store, p);
    auto b = make_window_pairs(store, p);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].start_index == b[i].start_index);
        REQUIRE(a[i].input.v == b[i].input.v);
    }
}

TEST_CASE("window pairs: global_random starts are uniform (chi-square)",
          "[dataset][property]") {
    // n_t = 40, l = 5 -> feasible starts 0..30 (31 bins)
    TempDir dir;
    auto trajs = tiny_kdv_set(1, 8, 40, 4);
    auto store = write_store(trajs, kdv_meta(4), dir.path.string());

    const std::size_t bins = 31;
    std::vector<std::size_t> count(bins, 0);
    const std::size_t draws = 10000;
    // one pair per trajectory; emulate many trajectories by varying the seed
    // derivation index through the sample list
    for (std::size_t d = 0; d < draws; ++d) {
        SamplingPolicy p{SamplingMode::global_random, 5, 0, 0, d};
        auto pairs = make_window_pairs(store, p);
        ++count[pairs[0].start_index];
    }
    const double expect = double(draws) / double(bins);
    double chi2 = 0.0;
    for (std::size_t b = 0; b < bins; ++b)
        chi2 += (double(count[b]) - expect) * (double(count[b]) - expect) / expect;
    // 1% critical value for 30 degrees of freedom
    REQUIRE(chi2 <= 50.89);
}

TEST_CASE("splits are disjoint, test block is generation-order fixed", "[dataset]") {
    TempDir dir;
    auto trajs = tiny_kdv_set(12, 8, 20, 6);
    auto store = write_store(trajs, kdv_meta(6), dir.path.string());

    auto s = split_dataset(store, 8, 2, 2, 123);
    REQUIRE(s.train.size() == 8);
    REQUIRE(s.val.size() == 2);
    REQUIRE(s.test == std::vector<std::size_t>{10, 11});
    std::vector<bool> seen(12, false);
    for (auto lst : {&s.train, &s.val, &s.test})
        for (auto i : *lst) {
            REQUIRE(!seen[i]);
            seen[i] = true;
        }

    // test block independent of the seed
    auto s2 = split_dataset(store, 8, 2, 2, 456);
    REQUIRE(s2.test == s.test);
    // same seed -> identical split
    auto s3 = split_dataset(store, 8, 2, 2, 123);
    REQUIRE(s3.train == s.train);
    REQUIRE(s3.val == s.val);

    // everything in test
    auto s4 = split_dataset(store, 0, 0, 12, 1);
    REQUIRE(s4.test.size() == 12);
    REQUIRE(s4.train.empty());

    REQUIRE_THROWS_AS(split_dataset(store, 10, 2, 2, 1), ParameterError);
}
