#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "waveop/eval/clipping.hpp"
#include "waveop/nn/model.hpp"

namespace waveop::eval {

struct RolloutResult {
    Tensor pred; // [n_total, dof]; snapshots past a blow-up are NaN
    bool blew_up = false;
    std::size_t blowup_index = std::numeric_limits<std::size_t>::max();
};

/// Iterate a window-to-window map over the full horizon. The first window_l
/// output snapshots are the inputs verbatim. Hard clipping (when enabled) is
/// applied to every emitted snapshot before it is fed back. A non-finite
/// value, or a sup-norm beyond sanity_sup, marks the rollout as blown up and
/// stops it; the partial prediction is kept.
inline RolloutResult rollout(const std::function<Tensor(const Tensor&)>& window_step,
                             const Tensor& initial_window, std::size_t n_total,
                             const ClipSpec& clip,
                             double sanity_sup = std::numeric_limits<double>::infinity()) {
    clip.validate();
    if (initial_window.rank() != 2)
        throw ShapeError("rollout: initial window must be [l, dof]");
    const std::size_t l = initial_window.shape[0];
    const std::size_t dof = initial_window.shape[1];
    if (n_total < l) throw ParameterError("rollout: horizon shorter than the input window");

    double B = std::numeric_limits<double>::infinity();
    if (clip.mode == ClipMode::hard) {
        if (clip.per_sample) {
            double sup = 0.0;
            for (std::size_t j = 0; j < dof; ++j)
                sup = std::max(sup, std::abs(initial_window.v[j]));
            B = clip.C * sup;
        } else {
            B = clip.global_B;
        }
    }

    RolloutResult res;
    res.pred = Tensor({n_total, dof},
                      std::vector<double>(n_total * dof,
                                          std::numeric_limits<double>::quiet_NaN()));
    std::copy(initial_window.v.begin(), initial_window.v.end(), res.pred.v.begin());

    Tensor window = initial_window;
    std::size_t written = l;
    while (written < n_total) {
        Tensor next = window_step(window);
        if (next.shape != window.shape) throw ShapeError("rollout: step changed shape");
        bool bad = false;
        for (std::size_t s = 0; s < l && !bad; ++s) {
            double sup = 0.0;
            for (std::size_t j = 0; j < dof; ++j) {
                double& x = next.v[s * dof + j];
                x = clip_value(x, B);
                if (!std::isfinite(x)) {
                    bad = true;
                    break;
                }
                sup = std::max(sup, std::abs(x));
            }
            if (!bad && sup > sanity_sup) bad = true;
            if (bad) {
                res.blew_up = true;
                res.blowup_index = std::min(res.blowup_index, written + s);
                break;
            }
        }
        if (res.blew_up) {
            // keep the snapshots that were still finite
            const std::size_t good = res.blowup_index - written;
            for (std::size_t s = 0; s < good; ++s) {
                const std::size_t at = written + s;
                if (at >= n_total) break;
                std::copy(next.v.begin() + long(s * dof), next.v.begin() + long((s + 1) * dof),
                          res.pred.v.begin() + long(at * dof));
            }
            break;
        }
        for (std::size_t s = 0; s < l; ++s) {
            const std::size_t at = written + s;
            if (at >= n_total) break;
            std::copy(next.v.begin() + long(s * dof), next.v.begin() + long((s + 1) * dof),
                      res.pred.v.begin() + long(at * dof));
        }
        written += l;
        window = std::move(next);
    }
    return res;
}

/// Window-advance closure over a trained model (shared, thread-safe reads).
inline std::function<Tensor(const Tensor&)> model_window_step(
    std::shared_ptr<const nn::ModelState> model, const pde::SpaceDesc& space) {
    auto stepper = std::make_shared<nn::WindowStepper>(*model, space);
    // keep the model alive alongside the stepper
    return [stepper, model](const Tensor& w) { return stepper->step(w); };
}

} // namespace waveop::eval
