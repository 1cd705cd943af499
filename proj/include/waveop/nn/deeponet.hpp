#pragma once

#include <string>
#include <vector>

#include "waveop/nn/params.hpp"

namespace waveop::nn {

/// Branch/trunk operator network: the branch encodes the input function from
/// its values at fixed sensors, the trunk encodes query coordinates, and the
/// output is their latent dot product plus a scalar bias.
struct DeepOnetConfig {
    std::vector<std::size_t> branch_layers; // hidden widths
    std::vector<std::size_t> trunk_layers;  // hidden widths
    std::size_t latent_dim = 0;
    std::size_t sensor_count = 0; // flattened input window size
    std::size_t coord_dim = 1;    // query coordinate dimension

    void validate() const {
        if (latent_dim == 0 || sensor_count == 0 || coord_dim == 0)
            throw ParameterError("deeponet: zero latent/sensor/coord field");
    }

    std::vector<std::size_t> branch_dims() const {
        std::vector<std::size_t> d{sensor_count};
        d.insert(d.end(), branch_layers.begin(), branch_layers.end());
        d.push_back(latent_dim);
        return d;
    }
    std::vector<std::size_t> trunk_dims() const {
        std::vector<std::size_t> d{coord_dim};
        d.insert(d.end(), trunk_layers.begin(), trunk_layers.end());
        d.push_back(latent_dim);
        return d;
    }
};

inline void deeponet_append_layout(ParamLayout& lay, const DeepOnetConfig& cfg) {
    cfg.validate();
    const auto bd = cfg.branch_dims();
    for (std::size_t i = 0; i + 1 < bd.size(); ++i) {
        lay.add("branch" + std::to_string(i) + ".w", {bd[i + 1], bd[i]});
        lay.add("branch" + std::to_string(i) + ".b", {bd[i + 1]});
    }
    const auto td = cfg.trunk_dims();
    for (std::size_t i = 0; i + 1 < td.size(); ++i) {
        lay.add("trunk" + std::to_string(i) + ".w", {td[i + 1], td[i]});
        lay.add("trunk" + std::to_string(i) + ".b", {td[i + 1]});
    }
    lay.add("bias0", {1});
}

/// window_flat: [1, sensor_count]; query_coords: [Q, coord_dim] (constant
/// leaf). Returns values at the queries, [Q].
inline Var deeponet_forward(Tape& t, const DeepOnetConfig& cfg, Params& P, Var window_flat,
                            Var query_coords) {
    const Tensor& wv = t.value(window_flat);
    if (wv.rank() != 2 || wv.shape[1] != cfg.sensor_count)
        throw ShapeError("deeponet_forward: sensor count mismatch " + wv.shape_str());
    const Tensor& qv = t.value(query_coords);
    if (qv.rank() != 2 || qv.shape[1] != cfg.coord_dim)
        throw ShapeError("deeponet_forward: query coord shape " + qv.shape_str());

    Var b = window_flat;
    const auto bd = cfg.branch_dims();
    for (std::size_t i = 0; i + 1 < bd.size(); ++i) {
        b = linear_rows(t, b, P("branch" + std::to_string(i) + ".w"),
                        P("branch" + std::to_string(i) + ".b"));
        if (i + 2 < bd.size()) b = elem(t, b, ElemFun::tanh_fn); // linear head
    }
    Var q = query_coords;
    const auto td = cfg.trunk_dims();
    for (std::size_t i = 0; i + 1 < td.size(); ++i) {
        q = linear_rows(t, q, P("trunk" + std::to_string(i) + ".w"),
                        P("trunk" + std::to_string(i) + ".b"));
        q = elem(t, q, ElemFun::tanh_fn);
    }
    // out[qi] = sum_p trunk[qi, p] * branch[0, p] + bias0
    Var out = linear_rows(t, q, b, P("bias0"));
    return reshape(t, out, {t.value(out).shape[0]});
}

inline void deeponet_init_params(std::vector<double>& theta, const ParamLayout& lay,
                                 GaussianStream& g) {
    for (const auto& seg : lay.segs) {
        if (seg.name == "bias0" || seg.name.find(".b") != std::string::npos) {
            for (std::size_t i = 0; i < seg.size; ++i) theta[seg.offset + i] = 0.0;
        } else if (seg.name.find(".w") != std::string::npos) {
            init_xavier(theta, seg, g);
        }
    }
}

} // namespace waveop::nn
