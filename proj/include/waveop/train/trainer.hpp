#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "waveop/core/parallel.hpp"
#include "waveop/data/windows.hpp"
#include "waveop/nn/model.hpp"
#include "waveop/train/adam.hpp"
#include "waveop/train/loss.hpp"

namespace waveop::train {

struct TrainConfig {
    std::size_t batch_size = 5;
    std::size_t epochs = 100;
    double lr0 = 1e-3;
    double weight_decay = 1e-6;
    double lr_decay = 0.75;
    std::size_t lr_decay_every = 50;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    double val_fraction = 0.2; // used when no explicit split is given

    void validate() const {
        if (batch_size == 0) throw ParameterError("train: batch_size must be positive");
        if (!(lr0 > 0.0)) throw ParameterError("train: lr0 must be positive");
        if (!(lr_decay > 0.0 && lr_decay <= 1.0))
            throw ParameterError("train: lr_decay must lie in (0, 1]");
        if (!(val_fraction >= 0.0 && val_fraction < 1.0))
            throw ParameterError("train: val_fraction must lie in [0, 1)");
    }

    double lr_at(std::size_t epoch) const {
        return lr0 * std::pow(lr_decay, double(epoch / lr_decay_every));
    }
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_error;
    std::vector<double> lambda_multiplier;
    std::vector<double> epoch_seconds;
    std::size_t best_epoch = 0;
    double best_val = std::numeric_limits<double>::infinity();
    bool diverged = false;
    double geo_min_latent_distance = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double validation_error(const nn::ModelState& m, const nn::ParamLayout& lay,
                               const nn::ModelGeometry& geom,
                               const std::vector<data::WindowPair>& pairs,
                               std::size_t workers) {
    if (pairs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> errs(pairs.size(), 0.0);
    parallel_for(pairs.size(), workers, [&](std::size_t i) {
        Tape t;
        nn::Params P(t, lay, m.theta, false);
        Var w = t.leaf(pairs[i].input, false);
        Var pred = nn::predict_window(t, m, P, w, geom);
        errs[i] = t.value(nn::relative_l2(t, pred, pairs[i].target)).v[0];
    });
    double s = 0.0;
    for (double e : errs) s += e;
    return s / double(errs.size());
}

} // namespace detail

/// Fit an operator model on one-fragment-per-trajectory window pairs.
/// Training uses decoupled-weight-decay Adam, a stepwise learning-rate decay
/// and the (optionally scheduled) conservation penalties; the returned
/// parameters are those of the epoch with the smallest validation error.
inline std::pair<nn::ModelState, TrainHistory> train_model(
    nn::ArchConfig arch, nn::RolloutMode mode, const data::TrajectoryStore& store,
    const std::vector<std::size_t>& train_idx, const std::vector<std::size_t>& val_idx,
    const data::SamplingPolicy& policy, const LossSpec& loss, const TrainConfig& cfg) {
    cfg.validate();
    loss.validate();

    nn::ModelState model;
    model.arch = std::move(arch);
    model.rollout_mode = mode;
    model.window_l = policy.window_l;
    nn::init_model_params(model, derive_seed(cfg.seed, "train.init"));

    auto train_pairs = data::make_window_pairs(store, policy, train_idx);
    data::SamplingPolicy val_policy = policy;
    val_policy.seed = derive_seed(policy.seed, "val.sampling");
    auto val_pairs = data::make_window_pairs(store, val_policy, val_idx);
    if (train_pairs.empty()) throw ParameterError("train: no training pairs");

    // normalization and sanity statistics from the training inputs only
    {
        double s1 = 0.0, s2 = 0.0;
        std::size_t n = 0;
        double sup = 0.0;
        for (const auto& p : train_pairs) {
            for (double x : p.input.v) {
                s1 += x;
                s2 += x * x;
                ++n;
            }
            sup = std::max({sup, p.input.sup_norm(), p.target.sup_norm()});
        }
        model.norm.mean = s1 / double(n);
        model.norm.stdev = std::max(1e-12, std::sqrt(s2 / double(n) -
                                                     model.norm.mean * model.norm.mean));
        model.train_sup = sup;
    }
    model.provenance = {
        {"dataset_checksum", store.meta.checksums.value("u.f32", "")},
        {"policy", data::sampling_mode_name(policy.mode)},
        {"policy_seed", policy.seed},
        {"train_seed", cfg.seed},
        {"n_train", train_pairs.size()},
        {"n_val", val_pairs.size()},
    };

    const nn::ParamLayout lay = nn::model_layout(model.arch);
    const nn::ModelGeometry geom = nn::make_geometry(model, store.space);
    const double snap_dt = store.times.size() > 1 ? store.times[1] - store.times[0] : 1.0;
    const QuantityContext qctx(store.meta.equation, store.space, policy.window_l, snap_dt);

    TrainHistory hist;
    if (cfg.epochs == 0) return {std::move(model), std::move(hist)};

    AdamW opt;
    std::vector<double> best_theta = model.theta;
    std::vector<std::size_t> order(train_pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const std::size_t B = std::min(cfg.batch_size, train_pairs.size());
    std::vector<std::vector<double>> slot_grad(B, std::vector<double>(lay.total, 0.0));
    std::vector<double> slot_loss(B, 0.0);
    std::vector<double> grad(lay.total, 0.0);
    std::size_t global_step = 0;
    const bool is_geo = std::holds_alternative<nn::GeoFnoConfig>(model.arch);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        // deterministic epoch shuffle
        {
            GaussianStream g(derive_seed(cfg.seed, "train.shuffle", epoch));
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[g.uniform_index(i)]);
        }
        const double lr = cfg.lr_at(epoch);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        bool bad = false;

        for (std::size_t start = 0; start < order.size() && !bad; start += B) {
            const std::size_t nb = std::min(B, order.size() - start);
            const double mult = std::pow(loss.penalty_growth, double(global_step));
            parallel_for(nb, cfg.workers, [&](std::size_t k) {
                const auto& pair = train_pairs[order[start + k]];
                Tape t;
                nn::Params P(t, lay, model.theta, true);
                Var w = t.leaf(pair.input, false);
                Var pred = nn::predict_window(t, model, P, w, geom);
                Var total = build_loss(t, pred, pair.target, loss, qctx, mult);
                slot_loss[k] = t.value(total).v[0];
                std::fill(slot_grad[k].begin(), slot_grad[k].end(), 0.0);
                t.backward(total);
                P.collect(slot_grad[k]);
            });
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t k = 0; k < nb; ++k) {
                batch_loss += slot_loss[k];
                for (std::size_t i = 0; i < grad.size(); ++i)
                    grad[i] += slot_grad[k][i] / double(nb);
            }
            batch_loss /= double(nb);
            if (!std::isfinite(batch_loss)) {
                bad = true;
                break;
            }
            opt.step(model.theta, grad, lr, cfg.weight_decay);
            ++global_step;
            epoch_loss += batch_loss;
            ++n_batches;
        }
        if (bad) {
            hist.diverged = true;
            break;
        }

        hist.train_loss.push_back(epoch_loss / double(std::max<std::size_t>(1, n_batches)));
        hist.lambda_multiplier.push_back(std::pow(loss.penalty_growth, double(global_step)));
        const double val =
            detail::validation_error(model, lay, geom, val_pairs, cfg.workers);
        hist.val_error.push_back(val);
        if (!val_pairs.empty() && val < hist.best_val) {
            hist.best_val = val;
            hist.best_epoch = epoch;
            best_theta = model.theta;
        }
        if (is_geo) {
            Tape t;
            nn::Params P(t, lay, model.theta, false);
            const auto& geo = std::get<nn::GeoFnoConfig>(model.arch);
            Var latent = nn::geo_deform(t, geo, P, t.leaf(geom.geo_coords, false));
            hist.geo_min_latent_distance = std::min(
                hist.geo_min_latent_distance, nn::geo_min_latent_distance(t.value(latent)));
        }
        hist.epoch_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }

    if (!val_pairs.empty() && !hist.val_error.empty()) model.theta = best_theta;
    return {std::move(model), std::move(hist)};
}

/// Convenience wrapper: split train/val internally by the configured fraction.
inline std::pair<nn::ModelState, TrainHistory> train_model(
    nn::ArchConfig arch, nn::RolloutMode mode, const data::TrajectoryStore& store,
    const data::SamplingPolicy& policy, const LossSpec& loss, const TrainConfig& cfg) {
    const std::size_t n = store.n_samples();
    const std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * double(n)));
    auto split = data::split_dataset(store, n - n_val, n_val, 0, cfg.seed);
    return train_model(std::move(arch), mode, store, split.train, split.val, policy, loss,
                       cfg);
}

} // namespace waveop::train
