#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "waveop/data/store.hpp"
#include "waveop/data/windows.hpp"
#include "waveop/grf/gaussian_random_field.hpp"
#include "waveop/pde/kdv.hpp"
#include "waveop/train/trainer.hpp"

using namespace waveop;
using namespace waveop::train;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        static int c = 0;
        path = fs::temp_directory_path() /
               ("waveop_train_" + std::to_string(::getpid()) + "_" + std::to_string(c++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

data::TrajectoryStore tiny_kdv_store(const fs::path& dir, std::size_t n, std::size_t res,
                                     std::size_t n_t, std::uint64_t seed,
                                     double gamma = 2.5) {
    grf::GrfSpec spec;
    spec.sigma2 = 2401.0;
    spec.tau = 7.0;
    spec.gamma = gamma;
    spec.boundary = grf::Boundary::periodic1d;
    spec.resolution = res;
    spec.seed = seed;
    auto fields = grf::sample_grf_periodic_1d(spec, n);
    std::vector<pde::Trajectory> trajs;
    pde::KdvOptions opt{.max_internal_dt = 1e-3};
    for (auto& f : fields) trajs.push_back(pde::solve_kdv(f, 0.01, 0.2, n_t, opt));
    data::StoreMeta meta;
    meta.equation = pde::Equation::kdv;
    meta.T = 0.2;
    meta.base_seed = seed;
    return data::write_store(trajs, meta, dir.string());
}

Tensor random_window(std::size_t l, std::size_t dof, std::uint64_t seed) {
    Tensor t({l, dof});
    GaussianStream g(seed);
    for (auto& x : t.v) x = g.normal();
    return t;
}

} // namespace

TEST_CASE("loss reduces to the base loss when all lambdas vanish", "[training][loss]") {
    const std::size_t l = 4, n = 32;
    QuantityContext ctx(pde::Equation::kdv, pde::GridSpec1D{n}, l, 0.01);
    LossSpec spec;
    spec.lambdas = {{Quantity::e1, 0.0}, {Quantity::e2, 0.0}};
    Tensor pred = random_window(l, n, 1), target = random_window(l, n, 2);
    auto c = conservation_regularized_loss(pred, target, spec, ctx);
    REQUIRE(c.total == c.base);

    // pred == target -> exactly zero for the relative-L2 base
    auto z = conservation_regularized_loss(target, target, spec, ctx);
    REQUIRE(z.total == 0.0);
}

TEST_CASE("constant shift produces the analytic E1 penalty", "[training][loss]") {
    const std::size_t l = 3, n = 64;
    QuantityContext ctx(pde::Equation::kdv, pde::GridSpec1D{n}, l, 0.01);
    LossSpec spec;
    spec.base = BaseLoss::relative_l2;
    spec.lambdas = {{Quantity::e1, 1.0}, {Quantity::e2, 0.0}};
    Tensor target = random_window(l, n, 3);
    Tensor pred = target;
    const double c = 0.37;
    for (auto& x : pred.v) x += c;
    auto comp = conservation_regularized_loss(pred, target, spec, ctx);
    // E1 shifts by exactly c on the unit interval, so the penalty is c^2
    REQUIRE(comp.penalties[0] == Catch::Approx(c * c).margin(1e-12));
    REQUIRE(comp.penalties[1] == Catch::Approx((2.0 * c * 0.0)).margin(1.0)); // lambda = 0
    REQUIRE(comp.penalties[1] == 0.0);
}

TEST_CASE("penalty schedule follows the geometric law with a cap", "[training][loss]") {
    REQUIRE(penalty_schedule(0.1, 1.0, 12345) == 0.1);
    REQUIRE(penalty_schedule(0.1, 1.001, 0) == Catch::Approx(0.1));
    REQUIRE(penalty_schedule(0.1, 1.001, 1000) == Catch::Approx(0.2716924).margin(1e-4));
    REQUIRE(penalty_schedule(0.1, 2.0, 1000, 1e6) == 1e6);
    REQUIRE_THROWS_AS(penalty_schedule(-1.0, 1.1, 0), ParameterError);
    REQUIRE_THROWS_AS(penalty_schedule(0.1, 0.9, 0), ParameterError);
}

TEST_CASE("loss is non-negative and monotone in each lambda", "[training][property]") {
    const std::size_t l = 3, n = 32;
    QuantityContext ctx(pde::Equation::kdv, pde::GridSpec1D{n}, l, 0.01);
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Tensor pred = random_window(l, n, 100 + trial);
        Tensor target = random_window(l, n, 200 + trial);
        double prev = -1.0;
        for (double lam : {0.0, 0.5, 2.0, 10.0}) {
            LossSpec spec;
            spec.lambdas = {{Quantity::e1, lam}, {Quantity::e2, lam}};
            auto c = conservation_regularized_loss(pred, target, spec, ctx);
            REQUIRE(c.total >= 0.0);
            REQUIRE(c.total >= prev);
            prev = c.total;
        }
    }
}

TEST_CASE("conservation penalty gradient matches finite differences",
          "[training][gradcheck]") {
    const std::size_t l = 2, n = 24;
    QuantityContext ctx(pde::Equation::kdv, pde::GridSpec1D{n}, l, 0.01);
    LossSpec spec;
    spec.lambdas = {{Quantity::e1, 0.7}, {Quantity::e2, 1.3}, {Quantity::e3, 0.2}};
    Tensor target = random_window(l, n, 5);
    Tensor pred = random_window(l, n, 6);

    nn::Tape t;
    nn::Var p = t.leaf(pred, true);
    nn::Var loss = build_loss(t, p, target, spec, ctx, 1.0);
    t.backward(loss);
    const Tensor grad = t.grad(p);

    GaussianStream pick(7);
    for (int k = 0; k < 40; ++k) {
        const std::size_t i = pick.uniform_index(pred.size());
        const double h = 1e-5;
        Tensor pp = pred, pm = pred;
        pp.v[i] += h;
        pm.v[i] -= h;
        const double fp = conservation_regularized_loss(pp, target, spec, ctx).total;
        const double fm = conservation_regularized_loss(pm, target, spec, ctx).total;
        const double fd = (fp - fm) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad.v[i]), 1e-6});
        REQUIRE(std::abs(fd - grad.v[i]) / denom <= 1e-4);
    }
}

TEST_CASE("energy quantity matches the solver-side evaluation", "[training][loss]") {
    const std::size_t l = 3, ny = 9, nx = 9;
    pde::GridSpec2D grid{nx, ny};
    const double dt = 0.05;
    QuantityContext ctx(pde::Equation::sine_gordon, grid, l, dt);

    Tensor window = random_window(l, nx * ny, 8);
    nn::Tape t;
    auto vals = ctx.per_snapshot(t, t.leaf(window, false), Quantity::energy);
    // middle snapshot: central-difference velocity, same as the solver audit
    std::vector<double> u(window.v.begin() + nx * ny, window.v.begin() + 2 * nx * ny);
    std::vector<double> ut(nx * ny);
    for (std::size_t j = 0; j < nx * ny; ++j)
        ut[j] = (window.v[2 * nx * ny + j] - window.v[j]) / (2.0 * dt);
    const double expect =
        pde::wave_energy(ut, u, grid, [](double x) { return 1.0 - std::cos(x); });
    REQUIRE(t.value(vals[1]).v[0] == Catch::Approx(expect).margin(1e-10));
}

TEST_CASE("quantity/equation mismatch is rejected", "[training][loss]") {
    QuantityContext ctx(pde::Equation::kdv, pde::GridSpec1D{16}, 2, 0.01);
    nn::Tape t;
    Tensor w = random_window(2, 16, 9);
    REQUIRE_THROWS_AS(ctx.per_snapshot(t, t.leaf(w, false), Quantity::energy),
                      ParameterError);
}

TEST_CASE("learning rate schedule", "[training]") {
    TrainConfig cfg;
    cfg.lr0 = 1e-3;
    REQUIRE(cfg.lr_at(0) == 1e-3);
    REQUIRE(cfg.lr_at(49) == 1e-3);
    REQUIRE(cfg.lr_at(50) == Catch::Approx(7.5e-4));
    REQUIRE(cfg.lr_at(100) == Catch::Approx(5.625e-4));
}

TEST_CASE("epochs = 0 returns an initialized model and empty history", "[training]") {
    TempDir dir;
    auto store = tiny_kdv_store(dir.path, 6, 32, 12, 11);
    data::SamplingPolicy policy{data::SamplingMode::fixed_start, 4, 0, 0, 1};
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 3;
    LossSpec loss;
    auto [model, hist] = train_model(nn::fno_recurrent_1d(4, 4, 8, 2),
                                     nn::RolloutMode::recurrent, store, policy, loss, cfg);
    REQUIRE(hist.train_loss.empty());
    REQUIRE(hist.val_error.empty());
    REQUIRE(model.theta.size() == nn::declared_param_count(model.arch));
    REQUIRE(model.norm.stdev > 0.0);
}

TEST_CASE("training is deterministic across reruns", "[training]") {
    TempDir dir;
    auto store = tiny_kdv_store(dir.path, 8, 32, 12, 13);
    data::SamplingPolicy policy{data::SamplingMode::global_random, 4, 0, 0, 17};
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 3;
    cfg.seed = 21;
    cfg.workers = 2;
    LossSpec loss;
    loss.lambdas = {{Quantity::e1, 0.1}};

    auto [m1, h1] = train_model(nn::fno_recurrent_1d(4, 4, 8, 2),
                                nn::RolloutMode::recurrent, store, policy, loss, cfg);
    auto [m2, h2] = train_model(nn::fno_recurrent_1d(4, 4, 8, 2),
                                nn::RolloutMode::recurrent, store, policy, loss, cfg);
    REQUIRE(h1.best_epoch == h2.best_epoch);
    REQUIRE(h1.val_error.size() == h2.val_error.size());
    for (std::size_t e = 0; e < h1.val_error.size(); ++e)
        REQUIRE(std::abs(h1.val_error[e] - h2.val_error[e]) <= 1e-10);
    REQUIRE(m1.theta == m2.theta);
}

TEST_CASE("a toy model memorizes five trajectories", "[training][slow]") {
    TempDir dir;
    // smooth fields and a short window keep the toy problem well conditioned
    auto store = tiny_kdv_store(dir.path, 5, 32, 20, 15, 4.0);
    data::SamplingPolicy policy{data::SamplingMode::fixed_start, 5, 0, 0, 1};
    TrainConfig cfg;
    cfg.epochs = 500;
    cfg.batch_size = 5;
    cfg.seed = 5;
    cfg.workers = 2;
    cfg.val_fraction = 0.0; // memorization test: all five in training
    cfg.lr_decay = 0.65;    // sharper anneal so the full-batch tail settles
    LossSpec loss;

    auto arch = nn::fno_recurrent_1d(5, 16, 32, 2);
    arch.project_width = 32;
    auto [model, hist] = train_model(std::move(arch), nn::RolloutMode::recurrent, store,
                                     policy, loss, cfg);
    REQUIRE(!hist.diverged);
    REQUIRE(hist.train_loss.back() < 1e-3);
}
