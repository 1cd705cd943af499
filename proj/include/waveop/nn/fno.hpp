#pragma once

#include <string>
#include <vector>

#include "waveop/nn/params.hpp"
#include "waveop/nn/spectral.hpp"

namespace waveop::nn {

enum class Activation { gelu, relu, identity };

inline ElemFun to_elem(Activation a) {
    switch (a) {
        case Activation::gelu: return ElemFun::gelu;
        case Activation::relu: return ElemFun::relu;
        case Activation::identity: return ElemFun::identity;
    }
    return ElemFun::identity;
}

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::gelu: return "gelu";
        case Activation::relu: return "relu";
        case Activation::identity: return "identity";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "gelu") return Activation::gelu;
    if (s == "relu") return Activation::relu;
    if (s == "identity") return Activation::identity;
    throw ParameterError("unknown activation: " + s);
}

struct SpectralLayerSpec {
    std::vector<std::size_t> modes; // retained modes per convolution axis
    std::size_t width = 0;          // output channels of this layer
    Activation activation = Activation::gelu;
    bool residual = true;
};

enum class FnoVariant { fno1d, fno2d, fno3d };

inline std::size_t fno_conv_rank(FnoVariant v) {
    switch (v) {
        case FnoVariant::fno1d: return 1;
        case FnoVariant::fno2d: return 2;
        case FnoVariant::fno3d: return 3;
    }
    return 1;
}

struct FnoConfig {
    FnoVariant variant = FnoVariant::fno1d;
    std::vector<SpectralLayerSpec> layers;
    std::size_t lift_width = 0;    // equals layers[0] input width
    std::size_t project_width = 0; // hidden width of the projection MLP
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    bool coord_channels = true;

    void validate() const {
        if (layers.empty()) throw ParameterError("fno: needs at least one spectral layer");
        if (lift_width == 0 || project_width == 0 || in_channels == 0 || out_channels == 0)
            throw ParameterError("fno: zero width/channel field");
        for (const auto& l : layers) {
            if (l.modes.size() != fno_conv_rank(variant))
                throw ParameterError("fno: layer modes rank does not match the variant");
            if (l.width == 0) throw ParameterError("fno: zero layer width");
        }
    }
};

inline void fno_append_layout(ParamLayout& lay, const FnoConfig& cfg,
                              const std::string& prefix = "") {
    cfg.validate();
    lay.add(prefix + "lift.w", {cfg.lift_width, cfg.in_channels});
    lay.add(prefix + "lift.b", {cfg.lift_width});
    std::size_t prev = cfg.lift_width;
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        const auto& l = cfg.layers[i];
        // retained multi-modes: Hermitian half on the last axis, signed
        // elsewhere; independent of the grid size
        std::size_t M = 1;
        for (std::size_t a = 0; a < l.modes.size(); ++a)
            M *= (a + 1 == l.modes.size()) ? l.modes[a] : 2 * l.modes[a] - 1;
        const std::string p = prefix + "layer" + std::to_string(i) + ".";
        lay.add(p + "spec_re", {M, l.width, prev});
        lay.add(p + "spec_im", {M, l.width, prev});
        if (l.residual) {
            lay.add(p + "res_w", {l.width, prev});
            lay.add(p + "res_b", {l.width});
        }
        prev = l.width;
    }
    lay.add(prefix + "proj1.w", {cfg.project_width, prev});
    lay.add(prefix + "proj1.b", {cfg.project_width});
    lay.add(prefix + "proj2.w", {cfg.out_channels, cfg.project_width});
    lay.add(prefix + "proj2.b", {cfg.out_channels});
}

/// Forward pass on assembled input channels x: [in_channels, spatial...].
inline Var fno_forward(Tape& t, const FnoConfig& cfg, Params& P, Var x,
                       const std::string& prefix = "") {
    const Tensor& xv = t.value(x);
    if (xv.shape[0] != cfg.in_channels)
        throw ShapeError("fno_forward: input channels " + xv.shape_str());
    if (xv.rank() - 1 != fno_conv_rank(cfg.variant))
        throw ShapeError("fno_forward: spatial rank does not match the variant");

    Var z = channel_linear(t, x, P(prefix + "lift.w"), P(prefix + "lift.b"));
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        const auto& l = cfg.layers[i];
        const std::string p = prefix + "layer" + std::to_string(i) + ".";
        Var s = spectral_mix(t, z, P(p + "spec_re"), P(p + "spec_im"), l.modes);
        if (l.residual)
            s = add(t, s, channel_linear(t, z, P(p + "res_w"), P(p + "res_b")));
        z = elem(t, s, to_elem(l.activation));
    }
    Var h = elem(t, channel_linear(t, z, P(prefix + "proj1.w"), P(prefix + "proj1.b")),
                 ElemFun::gelu);
    return channel_linear(t, h, P(prefix + "proj2.w"), P(prefix + "proj2.b"));
}

inline void fno_init_params(std::vector<double>& theta, const ParamLayout& lay,
                            GaussianStream& g, const std::string& prefix = "") {
    for (const auto& seg : lay.segs) {
        if (seg.name.rfind(prefix, 0) != 0) continue;
        const std::string local = seg.name.substr(prefix.size());
        if (local.find("spec_") != std::string::npos) {
            // scale 1/(cin*cout), mirroring common practice for spectral weights
            const double s = 1.0 / double(seg.shape[1] * seg.shape[2]);
            for (std::size_t i = 0; i < seg.size; ++i)
                theta[seg.offset + i] = s * (2.0 * g.uniform() - 1.0);
        } else if (local.find(".b") != std::string::npos) {
            for (std::size_t i = 0; i < seg.size; ++i) theta[seg.offset + i] = 0.0;
        } else if (local.find(".w") != std::string::npos) {
            init_xavier(theta, seg, g);
        }
    }
}

/// Standalone spectral layer application (weights supplied directly); the
/// unit-test surface for transform round trips and mode-cutoff checks.
struct SpectralLayerWeights {
    Tensor spec_re, spec_im; // [M, width, in]
    Tensor res_w, res_b;     // optional; empty when the layer has no residual
};

inline Tensor spectral_conv_forward(const SpectralLayerSpec& layer,
                                    const SpectralLayerWeights& w, const Tensor& z) {
    Tape t;
    Var x = t.leaf(z, false);
    Var s = spectral_mix(t, x, t.leaf(w.spec_re, false), t.leaf(w.spec_im, false),
                         layer.modes);
    if (layer.residual && w.res_w.size() > 0) {
        Var r = channel_linear(t, x, t.leaf(w.res_w, false),
                               w.res_b.size() ? t.leaf(w.res_b, false) : Var{});
        s = add(t, s, r);
    }
    return t.value(elem(t, s, to_elem(layer.activation)));
}

} // namespace waveop::nn
