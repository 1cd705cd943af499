#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveop/core/hash.hpp"
#include "waveop/nn/deeponet.hpp"
#include "waveop/nn/fno.hpp"
#include "waveop/nn/geofno.hpp"
#include "waveop/pde/grids.hpp"

namespace waveop::nn {

using nlohmann::json;

enum class RolloutMode { recurrent, full_prediction };

inline std::string rollout_mode_name(RolloutMode m) {
    return m == RolloutMode::recurrent ? "recurrent" : "full_prediction";
}
inline RolloutMode rollout_mode_from_name(const std::string& s) {
    if (s == "recurrent") return RolloutMode::recurrent;
    if (s == "full_prediction") return RolloutMode::full_prediction;
    throw ParameterError("unknown rollout mode: " + s);
}

/// Scalar standardization fitted on training inputs; applied to the value
/// channel on the way in and inverted on the way out.
struct Normalization {
    double mean = 0.0;
    double stdev = 1.0;
};

/// Optional smooth output bound  y -> B tanh(y/B)  baked into the model
/// (training-time counterpart of hard inference clipping).
struct SoftClipSpec {
    bool enabled = false;
    double C = 1.0;
    bool per_sample = true; // B = C * sup|first input snapshot|, else global_B
    double global_B = 0.0;
};

using ArchConfig = std::variant<FnoConfig, DeepOnetConfig, GeoFnoConfig>;

struct ModelState {
    ArchConfig arch;
    RolloutMode rollout_mode = RolloutMode::recurrent;
    std::size_t window_l = 10;
    std::vector<double> theta;
    Normalization norm;
    SoftClipSpec soft_clip;
    double train_sup = 0.0; // sup-norm of the training data, for sanity bounds
    json provenance = json::object();
};

inline ParamLayout model_layout(const ArchConfig& arch) {
    ParamLayout lay;
    std::visit(
        [&](const auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, FnoConfig>) fno_append_layout(lay, cfg);
            if constexpr (std::is_same_v<T, DeepOnetConfig>) deeponet_append_layout(lay, cfg);
            if constexpr (std::is_same_v<T, GeoFnoConfig>) geofno_append_layout(lay, cfg);
        },
        arch);
    return lay;
}

inline std::size_t declared_param_count(const ArchConfig& arch) {
    return model_layout(arch).total;
}

inline void init_model_params(ModelState& m, std::uint64_t seed) {
    const ParamLayout lay = model_layout(m.arch);
    m.theta.assign(lay.total, 0.0);
    GaussianStream g(derive_seed(seed, "model.init"));
    std::visit(
        [&](const auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, FnoConfig>) fno_init_params(m.theta, lay, g);
            if constexpr (std::is_same_v<T, DeepOnetConfig>)
                deeponet_init_params(m.theta, lay, g);
            if constexpr (std::is_same_v<T, GeoFnoConfig>)
                geofno_init_params(m.theta, lay, cfg, g);
        },
        m.arch);
}

// ---------------------------------------------------------------------------
// geometry: constant tensors derived from the space a model runs on

struct ModelGeometry {
    std::vector<std::size_t> space_dims; // spatial grid dims ({n} or {ny, nx})
    std::size_t dof = 0;
    Tensor fno_coords;   // [dc, spatial...] for the fno input assembly
    Tensor don_queries;  // [Q, d] trunk inputs
    Tensor geo_coords;   // [n, 2] physical node positions
    Tensor geo_coord_channels; // [2, n]
};

/// Normalized window-relative time coordinate of output/input slot s.
inline double window_time_coord(std::size_t s, std::size_t l) {
    return (double(s) + 0.5) / double(l);
}

inline ModelGeometry make_geometry(const ModelState& m, const pde::SpaceDesc& space) {
    ModelGeometry g;
    const std::size_t l = m.window_l;
    g.dof = pde::space_dof(space);

    if (const auto* g1 = std::get_if<pde::GridSpec1D>(&space)) {
        g.space_dims = {g1->n};
        if (m.rollout_mode == RolloutMode::recurrent) {
            g.fno_coords = Tensor({1, g1->n});
            for (std::size_t i = 0; i < g1->n; ++i) g.fno_coords.v[i] = g1->x(i);
        } else {
            g.fno_coords = Tensor({2, l, g1->n});
            for (std::size_t s = 0; s < l; ++s)
                for (std::size_t i = 0; i < g1->n; ++i) {
                    g.fno_coords.v[s * g1->n + i] = window_time_coord(s, l);
                    g.fno_coords.v[l * g1->n + s * g1->n + i] = g1->x(i);
                }
        }
        const std::size_t dc = m.rollout_mode == RolloutMode::recurrent ? 1 : 2;
        const std::size_t Q = (m.rollout_mode == RolloutMode::recurrent ? 1 : l) * g1->n;
        g.don_queries = Tensor({Q, dc});
        std::size_t r = 0;
        const std::size_t reps = m.rollout_mode == RolloutMode::recurrent ? 1 : l;
        for (std::size_t s = 0; s < reps; ++s)
            for (std::size_t i = 0; i < g1->n; ++i) {
                if (dc == 2) {
                    g.don_queries.v[r * 2] = window_time_coord(s, l);
                    g.don_queries.v[r * 2 + 1] = g1->x(i);
                } else {
                    g.don_queries.v[r] = g1->x(i);
                }
                ++r;
            }
    } else if (const auto* g2 = std::get_if<pde::GridSpec2D>(&space)) {
        g.space_dims = {g2->ny, g2->nx};
        if (m.rollout_mode == RolloutMode::recurrent) {
            g.fno_coords = Tensor({2, g2->ny, g2->nx});
            for (std::size_t j = 0; j < g2->ny; ++j)
                for (std::size_t i = 0; i < g2->nx; ++i) {
                    g.fno_coords.v[j * g2->nx + i] = g2->y(j);
                    g.fno_coords.v[g2->dof() + j * g2->nx + i] = g2->x(i);
                }
        } else {
            const std::size_t sp = l * g2->dof();
            g.fno_coords = Tensor({3, l, g2->ny, g2->nx});
            for (std::size_t s = 0; s < l; ++s)
                for (std::size_t j = 0; j < g2->ny; ++j)
                    for (std::size_t i = 0; i < g2->nx; ++i) {
                        const std::size_t at = s * g2->dof() + j * g2->nx + i;
                        g.fno_coords.v[at] = window_time_coord(s, l);
                        g.fno_coords.v[sp + at] = g2->y(j);
                        g.fno_coords.v[2 * sp + at] = g2->x(i);
                    }
        }
        const std::size_t dc = m.rollout_mode == RolloutMode::recurrent ? 2 : 3;
        const std::size_t reps = m.rollout_mode == RolloutMode::recurrent ? 1 : l;
        g.don_queries = Tensor({reps * g2->dof(), dc});
        std::size_t r = 0;
        for (std::size_t s = 0; s < reps; ++s)
            for (std::size_t j = 0; j < g2->ny; ++j)
                for (std::size_t i = 0; i < g2->nx; ++i) {
                    std::size_t c = 0;
                    if (dc == 3) g.don_queries.v[r * dc + c++] = window_time_coord(s, l);
                    g.don_queries.v[r * dc + c++] = g2->x(i);
                    g.don_queries.v[r * dc + c] = g2->y(j);
                    ++r;
                }
    } else if (const auto* pc = std::get_if<pde::PointCloud>(&space)) {
        const std::size_t n = pc->coords.size();
        g.geo_coords = Tensor({n, 2});
        g.geo_coord_channels = Tensor({2, n});
        for (std::size_t i = 0; i < n; ++i) {
            g.geo_coords.v[2 * i] = pc->coords[i][0];
            g.geo_coords.v[2 * i + 1] = pc->coords[i][1];
            g.geo_coord_channels.v[i] = pc->coords[i][0];
            g.geo_coord_channels.v[n + i] = pc->coords[i][1];
        }
        const std::size_t reps = m.rollout_mode == RolloutMode::recurrent ? 1 : l;
        const std::size_t dc = m.rollout_mode == RolloutMode::recurrent ? 2 : 3;
        g.don_queries = Tensor({reps * n, dc});
        std::size_t r = 0;
        for (std::size_t s = 0; s < reps; ++s)
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t c = 0;
                if (dc == 3) g.don_queries.v[r * dc + c++] = window_time_coord(s, l);
                g.don_queries.v[r * dc + c++] = pc->coords[i][0];
                g.don_queries.v[r * dc + c] = pc->coords[i][1];
                ++r;
            }
    }
    return g;
}

// ---------------------------------------------------------------------------
// forward passes

/// One architecture application: window [l, dof] -> recurrent: snapshot
/// [dof]; full prediction: window [l, dof]. Raw (physical) units in and out.
inline Var forward_window(Tape& t, const ModelState& m, Params& P, Var window,
                          const ModelGeometry& geom) {
    const Tensor& wv = t.value(window);
    if (wv.rank() != 2 || wv.shape[0] != m.window_l || wv.shape[1] != geom.dof)
        throw ShapeError("forward_window: window " + wv.shape_str() +
                         " does not match rollout geometry");
    const std::size_t l = m.window_l;
    const std::size_t dof = geom.dof;

    double soft_B = 0.0;
    if (m.soft_clip.enabled) {
        if (m.soft_clip.per_sample) {
            for (std::size_t i = 0; i < dof; ++i)
                soft_B = std::max(soft_B, std::abs(wv.v[i]));
            soft_B = std::max(1e-12, m.soft_clip.C * soft_B);
        } else {
            soft_B = m.soft_clip.global_B;
        }
    }

    const double inv_std = 1.0 / m.norm.stdev;
    Var xn = affine_const(t, window, inv_std, -m.norm.mean * inv_std);

    Var y;
    if (const auto* fno = std::get_if<FnoConfig>(&m.arch)) {
        Var x;
        if (m.rollout_mode == RolloutMode::recurrent) {
            std::vector<std::size_t> shape{l};
            shape.insert(shape.end(), geom.space_dims.begin(), geom.space_dims.end());
            x = reshape(t, xn, shape);
        } else {
            std::vector<std::size_t> shape{1, l};
            shape.insert(shape.end(), geom.space_dims.begin(), geom.space_dims.end());
            x = reshape(t, xn, shape);
        }
        if (fno->coord_channels) x = concat0(t, x, t.leaf(geom.fno_coords, false));
        Var out = fno_forward(t, *fno, P, x);
        y = (m.rollout_mode == RolloutMode::recurrent)
                ? reshape(t, out, {dof})
                : reshape(t, out, {l, dof});
    } else if (std::holds_alternative<DeepOnetConfig>(m.arch)) {
        const auto& don = std::get<DeepOnetConfig>(m.arch);
        Var flat = reshape(t, xn, {std::size_t{1}, l * dof});
        Var q = t.leaf(geom.don_queries, false);
        Var out = deeponet_forward(t, don, P, flat, q);
        y = (m.rollout_mode == RolloutMode::recurrent) ? out : reshape(t, out, {l, dof});
    } else {
        const auto& geo = std::get<GeoFnoConfig>(m.arch);
        Var x = xn; // [l, n] window slots as channels
        if (geo.base.coord_channels) x = concat0(t, x, t.leaf(geom.geo_coord_channels, false));
        Var out = geofno_forward(t, geo, P, x, t.leaf(geom.geo_coords, false));
        y = (m.rollout_mode == RolloutMode::recurrent) ? reshape(t, out, {dof})
                                                       : reshape(t, out, {l, dof});
    }

    Var denorm = affine_const(t, y, m.norm.stdev, m.norm.mean);
    if (m.soft_clip.enabled) denorm = soft_clip(t, denorm, soft_B);
    return denorm;
}

/// Shift-window recursion on the tape: l single-snapshot predictions, each
/// appended to the window tail while the head is dropped; gradients flow
/// through the whole unrolled chain.
inline Var recurrent_window_unroll(Tape& t, const ModelState& m, Params& P, Var window,
                                   const ModelGeometry& geom) {
    const std::size_t l = m.window_l;
    const std::size_t dof = geom.dof;
    Var w = window;
    Var out;
    for (std::size_t s = 0; s < l; ++s) {
        Var snap = forward_window(t, m, P, w, geom); // [dof]
        Var row = reshape(t, snap, {std::size_t{1}, dof});
        w = (l > 1) ? concat0(t, slice0(t, w, 1, l), row) : row;
        out = (s == 0) ? row : concat0(t, out, row);
    }
    return out; // [l, dof]
}

/// Window-to-window prediction under the model's rollout mode.
inline Var predict_window(Tape& t, const ModelState& m, Params& P, Var window,
                          const ModelGeometry& geom) {
    return m.rollout_mode == RolloutMode::recurrent
               ? recurrent_window_unroll(t, m, P, window, geom)
               : forward_window(t, m, P, window, geom);
}

// ---------------------------------------------------------------------------
// plain (inference) entry points

/// Generic shift-window recursion for an arbitrary one-step map; the unit
/// tests drive this with oracle and persistence stubs.
inline Tensor recurrent_rollout_window(const std::function<Tensor(const Tensor&)>& one_step,
                                       const Tensor& window) {
    const std::size_t l = window.shape[0];
    const std::size_t dof = window.shape[1];
    Tensor w = window, out({l, dof});
    for (std::size_t s = 0; s < l; ++s) {
        Tensor snap = one_step(w);
        if (snap.size() != dof) throw ShapeError("recurrent rollout: step output size");
        std::copy(snap.v.begin(), snap.v.end(), out.v.begin() + long(s * dof));
        if (l > 1)
            std::rotate(w.v.begin(), w.v.begin() + long(dof), w.v.end());
        std::copy(snap.v.begin(), snap.v.end(), w.v.end() - long(dof));
    }
    return out;
}

/// Stateless window stepper bound to a model; builds geometry and layout
/// once, then runs grad-free tapes per call.
class WindowStepper {
public:
    WindowStepper(const ModelState& m, const pde::SpaceDesc& space)
        : model_(m), layout_(model_layout(m.arch)), geom_(make_geometry(m, space)) {}

    /// [l, dof] -> next [l, dof]
    Tensor step(const Tensor& window) const {
        Tape t;
        Params P(t, layout_, model_.theta, false);
        Var w = t.leaf(window, false);
        Var out = predict_window(t, model_, P, w, geom_);
        return t.value(out);
    }

    /// single forward application (recurrent: one snapshot)
    Tensor apply_once(const Tensor& window) const {
        Tape t;
        Params P(t, layout_, model_.theta, false);
        Var w = t.leaf(window, false);
        Var out = forward_window(t, model_, P, w, geom_);
        return t.value(out);
    }

    const ModelGeometry& geometry() const { return geom_; }

private:
    const ModelState& model_;
    ParamLayout layout_;
    ModelGeometry geom_;
};

/// Model-bound variants of the window-advance operations.
inline Tensor recurrent_rollout_window(const ModelState& m, const Tensor& window,
                                       const pde::SpaceDesc& space) {
    if (m.rollout_mode != RolloutMode::recurrent)
        throw ParameterError("recurrent_rollout_window: model is not recurrent");
    WindowStepper s(m, space);
    return s.step(window);
}

inline Tensor full_prediction_window(const ModelState& m, const Tensor& window,
                                     const pde::SpaceDesc& space) {
    if (m.rollout_mode != RolloutMode::full_prediction)
        throw ParameterError("full_prediction_window: model is not full-prediction");
    WindowStepper s(m, space);
    return s.step(window);
}

// ---------------------------------------------------------------------------
// serialization

inline json arch_to_json(const ArchConfig& arch);
inline ArchConfig arch_from_json(const json& j);

inline json fno_to_json(const FnoConfig& c) {
    json layers = json::array();
    for (const auto& l : c.layers)
        layers.push_back(json{{"modes", l.modes},
                              {"width", l.width},
                              {"activation", activation_name(l.activation)},
                              {"residual", l.residual}});
    return json{{"type", "fno"},
                {"variant", c.variant == FnoVariant::fno1d   ? "fno1d"
                            : c.variant == FnoVariant::fno2d ? "fno2d"
                                                             : "fno3d"},
                {"layers", layers},
                {"lift_width", c.lift_width},
                {"project_width", c.project_width},
                {"in_channels", c.in_channels},
                {"out_channels", c.out_channels},
                {"coord_channels", c.coord_channels}};
}

inline FnoConfig fno_from_json(const json& j) {
    FnoConfig c;
    const std::string v = j.at("variant").get<std::string>();
    c.variant = v == "fno1d" ? FnoVariant::fno1d
                : v == "fno2d" ? FnoVariant::fno2d
                               : FnoVariant::fno3d;
    for (const auto& lj : j.at("layers")) {
        SpectralLayerSpec l;
        l.modes = lj.at("modes").get<std::vector<std::size_t>>();
        l.width = lj.at("width").get<std::size_t>();
        l.activation = activation_from_name(lj.at("activation").get<std::string>());
        l.residual = lj.at("residual").get<bool>();
        c.layers.push_back(std::move(l));
    }
    c.lift_width = j.at("lift_width").get<std::size_t>();
    c.project_width = j.at("project_width").get<std::size_t>();
    c.in_channels = j.at("in_channels").get<std::size_t>();
    c.out_channels = j.at("out_channels").get<std::size_t>();
    c.coord_channels = j.at("coord_channels").get<bool>();
    return c;
}

inline json arch_to_json(const ArchConfig& arch) {
    if (const auto* f = std::get_if<FnoConfig>(&arch)) return fno_to_json(*f);
    if (const auto* d = std::get_if<DeepOnetConfig>(&arch))
        return json{{"type", "deeponet"},
                    {"branch_layers", d->branch_layers},
                    {"trunk_layers", d->trunk_layers},
                    {"latent_dim", d->latent_dim},
                    {"sensor_count", d->sensor_count},
                    {"coord_dim", d->coord_dim}};
    const auto& g = std::get<GeoFnoConfig>(arch);
    json base = fno_to_json(g.base);
    return json{{"type", "geofno"},
                {"base", base},
                {"gx", g.gx},
                {"gy", g.gy},
                {"deform_layers", g.deform_layers}};
}

inline ArchConfig arch_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "fno") return fno_from_json(j);
    if (type == "deeponet") {
        DeepOnetConfig d;
        d.branch_layers = j.at("branch_layers").get<std::vector<std::size_t>>();
        d.trunk_layers = j.at("trunk_layers").get<std::vector<std::size_t>>();
        d.latent_dim = j.at("latent_dim").get<std::size_t>();
        d.sensor_count = j.at("sensor_count").get<std::size_t>();
        d.coord_dim = j.at("coord_dim").get<std::size_t>();
        return d;
    }
    if (type == "geofno") {
        GeoFnoConfig g;
        g.base = fno_from_json(j.at("base"));
        g.gx = j.at("gx").get<std::size_t>();
        g.gy = j.at("gy").get<std::size_t>();
        g.deform_layers = j.at("deform_layers").get<std::vector<std::size_t>>();
        return g;
    }
    throw ParameterError("unknown architecture type: " + type);
}

/// Checkpoint = JSON header (architecture, normalization, provenance) plus a
/// raw little-endian f64 parameter file checksummed from the header.
inline void save_checkpoint(const ModelState& m, const std::string& path) {
    const std::string params_path = path + ".params";
    {
        std::ofstream out(params_path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(m.theta.data()),
                  long(m.theta.size() * sizeof(double)));
        if (!out) throw Error("cannot write checkpoint params: " + params_path);
    }
    json j;
    j["arch"] = arch_to_json(m.arch);
    j["rollout_mode"] = rollout_mode_name(m.rollout_mode);
    j["window_l"] = m.window_l;
    j["normalization"] = {{"mean", m.norm.mean}, {"std", m.norm.stdev}};
    j["soft_clip"] = {{"enabled", m.soft_clip.enabled},
                      {"C", m.soft_clip.C},
                      {"per_sample", m.soft_clip.per_sample},
                      {"global_B", m.soft_clip.global_B}};
    j["train_sup"] = m.train_sup;
    j["provenance"] = m.provenance;
    j["param_count"] = m.theta.size();
    j["params_file"] = std::filesystem::path(params_path).filename().string();
    j["params_checksum"] = file_checksum(params_path);
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

inline ModelState load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open checkpoint: " + path);
    json j = json::parse(in);
    ModelState m;
    m.arch = arch_from_json(j.at("arch"));
    m.rollout_mode = rollout_mode_from_name(j.at("rollout_mode").get<std::string>());
    m.window_l = j.at("window_l").get<std::size_t>();
    m.norm.mean = j.at("normalization").at("mean").get<double>();
    m.norm.stdev = j.at("normalization").at("std").get<double>();
    m.soft_clip.enabled = j.at("soft_clip").at("enabled").get<bool>();
    m.soft_clip.C = j.at("soft_clip").at("C").get<double>();
    m.soft_clip.per_sample = j.at("soft_clip").at("per_sample").get<bool>();
    m.soft_clip.global_B = j.at("soft_clip").at("global_B").get<double>();
    m.train_sup = j.at("train_sup").get<double>();
    m.provenance = j.value("provenance", json::object());

    const auto dir = std::filesystem::path(path).parent_path();
    const std::string params_path =
        (dir / j.at("params_file").get<std::string>()).string();
    if (file_checksum(params_path) != j.at("params_checksum").get<std::string>())
        throw CorruptionError("checkpoint parameter file checksum mismatch: " + params_path);
    const std::size_t count = j.at("param_count").get<std::size_t>();
    if (count != declared_param_count(m.arch))
        throw CorruptionError("checkpoint parameter count does not match architecture");
    std::ifstream pin(params_path, std::ios::binary);
    m.theta.resize(count);
    pin.read(reinterpret_cast<char*>(m.theta.data()), long(count * sizeof(double)));
    if (!pin) throw CorruptionError("short read on checkpoint params: " + params_path);
    return m;
}

// ---------------------------------------------------------------------------
// reference configurations

/// Recurrent spectral model for 1D periodic problems: window slots ride the
/// channel axis, convolution is one-dimensional.
inline FnoConfig fno_recurrent_1d(std::size_t window_l, std::size_t modes = 16,
                                  std::size_t width = 48, std::size_t depth = 4) {
    FnoConfig c;
    c.variant = FnoVariant::fno1d;
    for (std::size_t i = 0; i < depth; ++i)
        c.layers.push_back({{modes}, width, Activation::gelu, true});
    c.lift_width = width;
    c.project_width = 128;
    c.in_channels = window_l + 1;
    c.out_channels = 1;
    return c;
}

/// Full-prediction spectral model for 1D problems: the window becomes a 2D
/// (time x space) field and both axes are convolved.
inline FnoConfig fno_full_1d(std::size_t /*window_l*/, std::size_t modes_t = 5,
                             std::size_t modes_x = 16, std::size_t width = 16,
                             std::size_t depth = 4, std::size_t project_width = 128) {
    FnoConfig c;
    c.variant = FnoVariant::fno2d;
    for (std::size_t i = 0; i < depth; ++i)
        c.layers.push_back({{modes_t, modes_x}, width, Activation::gelu, true});
    c.lift_width = width;
    c.project_width = project_width;
    c.in_channels = 3; // value + window-time + space coordinates
    c.out_channels = 1;
    return c;
}

inline FnoConfig fno_recurrent_2d(std::size_t window_l, std::size_t modes = 12,
                                  std::size_t width = 32, std::size_t depth = 4,
                                  std::size_t project_width = 128) {
    FnoConfig c;
    c.variant = FnoVariant::fno2d;
    for (std::size_t i = 0; i < depth; ++i)
        c.layers.push_back({{modes, modes}, width, Activation::gelu, true});
    c.lift_width = width;
    c.project_width = project_width;
    c.in_channels = window_l + 2;
    c.out_channels = 1;
    return c;
}

inline FnoConfig fno_full_2d(std::size_t /*window_l*/, std::size_t modes_t = 4,
                             std::size_t modes_s = 8, std::size_t width = 16,
                             std::size_t depth = 4) {
    FnoConfig c;
    c.variant = FnoVariant::fno3d;
    for (std::size_t i = 0; i < depth; ++i)
        c.layers.push_back({{modes_t, modes_s, modes_s}, width, Activation::gelu, true});
    c.lift_width = width;
    c.project_width = 128;
    c.in_channels = 4; // value + window-time + 2 space coordinates
    c.out_channels = 1;
    return c;
}

inline DeepOnetConfig deeponet_default(std::size_t window_l, std::size_t dof,
                                       RolloutMode mode, std::size_t coord_dim_space = 1) {
    DeepOnetConfig d;
    d.sensor_count = window_l * dof;
    d.branch_layers = {20};
    d.trunk_layers = {100, 100};
    d.latent_dim = 100;
    d.coord_dim = coord_dim_space + (mode == RolloutMode::full_prediction ? 1 : 0);
    return d;
}

inline GeoFnoConfig geofno_default(std::size_t window_l, RolloutMode mode,
                                   std::size_t modes = 8, std::size_t width = 24,
                                   std::size_t depth = 4, std::size_t grid = 16) {
    GeoFnoConfig g;
    g.base.variant = FnoVariant::fno2d;
    for (std::size_t i = 0; i < depth; ++i)
        g.base.layers.push_back({{modes, modes}, width, Activation::gelu, true});
    g.base.lift_width = width;
    g.base.project_width = 128;
    g.base.in_channels = window_l + 2; // window slots + node coordinates
    g.base.out_channels = mode == RolloutMode::recurrent ? 1 : window_l;
    g.gx = g.gy = grid;
    g.deform_layers = {32, 32};
    return g;
}

} // namespace waveop::nn
