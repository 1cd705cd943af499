#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "waveop/core/fft.hpp"
#include "waveop/nn/tape.hpp"
#include "waveop/pde/energy.hpp"
#include "waveop/pde/trajectory.hpp"

namespace waveop::train {

using nn::Tape;
using nn::Var;

enum class BaseLoss { relative_l2, mse };
enum class Quantity { e1, e2, e3, energy };

inline std::string base_loss_name(BaseLoss b) {
    return b == BaseLoss::relative_l2 ? "relative_l2" : "mse";
}
inline BaseLoss base_loss_from_name(const std::string& s) {
    if (s == "relative_l2") return BaseLoss::relative_l2;
    if (s == "mse") return BaseLoss::mse;
    throw ParameterError("unknown base loss: " + s);
}
inline std::string quantity_name(Quantity q) {
    switch (q) {
        case Quantity::e1: return "E1";
        case Quantity::e2: return "E2";
        case Quantity::e3: return "E3";
        case Quantity::energy: return "energy";
    }
    return "?";
}
inline Quantity quantity_from_name(const std::string& s) {
    if (s == "E1") return Quantity::e1;
    if (s == "E2") return Quantity::e2;
    if (s == "E3") return Quantity::e3;
    if (s == "energy") return Quantity::energy;
    throw ParameterError("unknown conserved quantity: " + s);
}

/// Data loss plus squared-difference penalties on conserved quantities.
struct LossSpec {
    BaseLoss base = BaseLoss::relative_l2;
    std::vector<std::pair<Quantity, double>> lambdas;
    double penalty_growth = 1.0; // multiply lambda by this each optimizer step
    double lambda_max = 1e6;

    void validate() const {
        for (const auto& [q, lam] : lambdas)
            if (!(lam >= 0.0)) throw ParameterError("loss: lambda must be >= 0");
        if (!(penalty_growth >= 1.0))
            throw ParameterError("loss: penalty growth factor must be >= 1");
        if (!(lambda_max > 0.0)) throw ParameterError("loss: lambda_max must be > 0");
    }
};

/// Geometric penalty schedule with an overflow cap.
inline double penalty_schedule(double lambda0, double a, std::size_t step,
                               double lambda_max = 1e6) {
    if (!(lambda0 >= 0.0) || !(a >= 1.0))
        throw ParameterError("penalty_schedule: need lambda0 >= 0 and a >= 1");
    if (lambda0 == 0.0 || a == 1.0) return std::min(lambda0, lambda_max);
    const double log_lam = std::log(lambda0) + double(step) * std::log(a);
    if (log_lam >= std::log(lambda_max)) return lambda_max;
    return std::exp(log_lam);
}

/// Precomputed machinery for evaluating conserved quantities of window
/// snapshots on a given space: quadrature weights, derivative stencils and
/// the window time-derivative map.
class QuantityContext {
public:
    QuantityContext(pde::Equation equation, const pde::SpaceDesc& space,
                    std::size_t window_l, double snap_dt)
        : equation_(equation), space_(space), window_l_(window_l), snap_dt_(snap_dt) {
        dof_ = pde::space_dof(space);
        if (const auto* g1 = std::get_if<pde::GridSpec1D>(&space_)) {
            quad_.assign(dof_, 1.0 / double(g1->n));
        } else if (const auto* g2 = std::get_if<pde::GridSpec2D>(&space_)) {
            quad_ = pde::grid2d_quadrature(*g2);
            build_grid_gradient(*g2);
        } else if (const auto* pc = std::get_if<pde::PointCloud>(&space_)) {
            quad_ = pde::cloud_quadrature(*pc);
            pde::CloudGradient grad(*pc);
            gx_ = stencil_to_map(grad.ddx, dof_);
            gy_ = stencil_to_map(grad.ddy, dof_);
        }
        build_time_derivative();
    }

    pde::Equation equation() const { return equation_; }
    std::size_t dof() const { return dof_; }
    std::size_t window_l() const { return window_l_; }

    bool supports(Quantity q) const {
        const bool is_1d = std::holds_alternative<pde::GridSpec1D>(space_);
        if (q == Quantity::energy) return !is_1d && equation_ != pde::Equation::kdv;
        return is_1d && equation_ == pde::Equation::kdv;
    }

    /// Per-snapshot quantity values of a window Var [l, dof].
    std::vector<Var> per_snapshot(Tape& t, Var window, Quantity q) const {
        if (!supports(q))
            throw ParameterError("quantity " + quantity_name(q) +
                                 " is not available for equation " +
                                 pde::equation_name(equation_));
        std::vector<Var> out;
        Var ut; // lazy: only energy needs it
        for (std::size_t s = 0; s < window_l_; ++s) {
            Var us = nn::reshape(t, nn::slice0(t, window, s, s + 1), {dof_});
            Tensor w({dof_}, quad_);
            switch (q) {
                case Quantity::e1: out.push_back(nn::dot_const(t, us, w)); break;
                case Quantity::e2:
                    out.push_back(nn::dot_const(t, nn::hadamard(t, us, us), w));
                    break;
                case Quantity::e3: {
                    ensure_spectral_derivative();
                    Var du = nn::apply_map(t, us, dx_spectral_, {dof_});
                    Var cubic = nn::hadamard(t, nn::hadamard(t, us, us), us);
                    Var third = nn::dot_const(t, cubic, Tensor({dof_}, scaled(quad_, 1.0 / 3.0)));
                    Var grad2 = nn::dot_const(t, nn::hadamard(t, du, du), w);
                    out.push_back(nn::sub(t, third, grad2));
                    break;
                }
                case Quantity::energy: {
                    if (!ut.valid()) ut = nn::apply_map(t, window, dt_map_, {window_l_, dof_});
                    Var uts = nn::reshape(t, nn::slice0(t, ut, s, s + 1), {dof_});
                    Var kin = nn::dot_const(t, nn::hadamard(t, uts, uts), w);
                    Var pot_x = nn::dot_const(t, [&] {
                        Var gxv = nn::apply_map(t, us, gx_, {dof_});
                        return nn::hadamard(t, gxv, gxv);
                    }(), w);
                    Var pot_y = nn::dot_const(t, [&] {
                        Var gyv = nn::apply_map(t, us, gy_, {dof_});
                        return nn::hadamard(t, gyv, gyv);
                    }(), w);
                    const nn::ElemFun F = equation_ == pde::Equation::sine_gordon
                                              ? nn::ElemFun::one_minus_cos
                                              : nn::ElemFun::quartic_quarter;
                    Var pot = nn::dot_const(t, nn::elem(t, us, F),
                                            Tensor({dof_}, scaled(quad_, 2.0)));
                    out.push_back(
                        nn::add(t, nn::add(t, kin, pot_x), nn::add(t, pot_y, pot)));
                    break;
                }
            }
        }
        return out;
    }

private:
    static std::vector<double> scaled(const std::vector<double>& w, double c) {
        std::vector<double> out(w);
        for (auto& x : out) x *= c;
        return out;
    }

    static nn::LinearMap stencil_to_map(const pde::StencilOperator& op, std::size_t dof) {
        std::vector<std::vector<std::pair<std::size_t, double>>> rows(dof);
        for (std::size_t i = 0; i < dof; ++i) rows[i] = op.rows[i];
        return nn::LinearMap::from_rows(dof, dof, std::move(rows));
    }

    void build_grid_gradient(const pde::GridSpec2D& g) {
        std::vector<std::vector<std::pair<std::size_t, double>>> rx(dof_), ry(dof_);
        const double hx = g.hx(), hy = g.hy();
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i) {
                const std::size_t c = g.at(i, j);
                if (i == 0)
                    rx[c] = {{g.at(1, j), 1.0 / hx}, {g.at(0, j), -1.0 / hx}};
                else if (i == g.nx - 1)
                    rx[c] = {{g.at(g.nx - 1, j), 1.0 / hx}, {g.at(g.nx - 2, j), -1.0 / hx}};
                else
                    rx[c] = {{g.at(i + 1, j), 0.5 / hx}, {g.at(i - 1, j), -0.5 / hx}};
                if (j == 0)
                    ry[c] = {{g.at(i, 1), 1.0 / hy}, {g.at(i, 0), -1.0 / hy}};
                else if (j == g.ny - 1)
                    ry[c] = {{g.at(i, g.ny - 1), 1.0 / hy}, {g.at(i, g.ny - 2), -1.0 / hy}};
                else
                    ry[c] = {{g.at(i, j + 1), 0.5 / hy}, {g.at(i, j - 1), -0.5 / hy}};
            }
        gx_ = nn::LinearMap::from_rows(dof_, dof_, std::move(rx));
        gy_ = nn::LinearMap::from_rows(dof_, dof_, std::move(ry));
    }

    void build_time_derivative() {
        const std::size_t l = window_l_, dof = dof_;
        std::vector<std::vector<std::pair<std::size_t, double>>> rows(l * dof);
        const double inv = 1.0 / snap_dt_;
        for (std::size_t s = 0; s < l; ++s)
            for (std::size_t j = 0; j < dof; ++j) {
                auto& r = rows[s * dof + j];
                if (l == 1) {
                    r = {}; // no temporal information in a single snapshot
                } else if (s == 0) {
                    r = {{dof + j, inv}, {j, -inv}};
                } else if (s == l - 1) {
                    r = {{s * dof + j, inv}, {(s - 1) * dof + j, -inv}};
                } else {
                    r = {{(s + 1) * dof + j, 0.5 * inv}, {(s - 1) * dof + j, -0.5 * inv}};
                }
            }
        dt_map_ = nn::LinearMap::from_rows(l * dof, l * dof, std::move(rows));
    }

    void ensure_spectral_derivative() const {
        if (dx_spectral_.n_out == dof_) return;
        // dense spectral differentiation matrix via columns of the transform
        std::vector<std::vector<std::pair<std::size_t, double>>> rows(dof_);
        std::vector<double> e(dof_, 0.0);
        std::vector<std::vector<double>> cols(dof_);
        for (std::size_t j = 0; j < dof_; ++j) {
            std::fill(e.begin(), e.end(), 0.0);
            e[j] = 1.0;
            cols[j] = spectral_derivative_periodic(e);
        }
        for (std::size_t i = 0; i < dof_; ++i) {
            rows[i].reserve(dof_);
            for (std::size_t j = 0; j < dof_; ++j)
                if (cols[j][i] != 0.0) rows[i].emplace_back(j, cols[j][i]);
        }
        dx_spectral_ = nn::LinearMap::from_rows(dof_, dof_, std::move(rows));
    }

    pde::Equation equation_;
    pde::SpaceDesc space_;
    std::size_t window_l_ = 0;
    double snap_dt_ = 0.0;
    std::size_t dof_ = 0;
    std::vector<double> quad_;
    nn::LinearMap gx_, gy_, dt_map_;
    mutable nn::LinearMap dx_spectral_;
};

struct LossComponents {
    double base = 0.0;
    std::vector<double> penalties; // per lambda entry, already scaled
    double total = 0.0;
};

/// Tape assembly of the regularized loss for a predicted window. The current
/// schedule multiplier scales every lambda (capped at lambda_max).
inline Var build_loss(Tape& t, Var pred, const Tensor& target, const LossSpec& spec,
                      const QuantityContext& ctx, double schedule_multiplier,
                      LossComponents* components = nullptr) {
    spec.validate();
    Var total = spec.base == BaseLoss::relative_l2 ? nn::relative_l2(t, pred, target)
                                                   : nn::mse(t, pred, target);
    if (components) {
        components->base = t.value(total).v[0];
        components->penalties.clear();
    }
    Tape aux; // target quantities carry no gradient
    Var tgt_leaf = aux.leaf(target, false);
    for (const auto& [q, lam0] : spec.lambdas) {
        const double lam = std::min(lam0 * schedule_multiplier, spec.lambda_max);
        auto pred_q = ctx.per_snapshot(t, pred, q);
        auto tgt_q = ctx.per_snapshot(aux, tgt_leaf, q);
        std::vector<Var> sq;
        sq.reserve(pred_q.size());
        for (std::size_t s = 0; s < pred_q.size(); ++s) {
            Var d = nn::affine_const(t, pred_q[s], 1.0, -aux.value(tgt_q[s]).v[0]);
            sq.push_back(nn::hadamard(t, d, d));
        }
        Var mean_sq =
            nn::dot_const(t, nn::stack_scalars(t, sq),
                          Tensor::full({sq.size()}, 1.0 / double(sq.size())));
        if (components) components->penalties.push_back(lam * t.value(mean_sq).v[0]);
        total = nn::add(t, total, nn::affine_const(t, mean_sq, lam, 0.0));
    }
    if (components) components->total = t.value(total).v[0];
    return total;
}

/// Value-level evaluation of the regularized loss (no gradients).
inline LossComponents conservation_regularized_loss(const Tensor& pred, const Tensor& target,
                                                    const LossSpec& spec,
                                                    const QuantityContext& ctx,
                                                    double schedule_multiplier = 1.0) {
    Tape t;
    Var p = t.leaf(pred, false);
    LossComponents c;
    build_loss(t, p, target, spec, ctx, schedule_multiplier, &c);
    return c;
}

} // namespace waveop::train
