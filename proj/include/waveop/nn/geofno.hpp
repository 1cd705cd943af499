#pragma once

#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "waveop/nn/fno.hpp"

namespace waveop::nn {

/// Spectral operator on an irregular node set: a learned coordinate
/// deformation maps physical nodes into the latent unit square, node values
/// are moved onto a rectangular latent grid by normalized Gaussian-kernel
/// scatter (partition of unity over nodes), the base spectral layers run on
/// that grid, and a matching gather interpolates back to the nodes. The
/// kernel bandwidth is trainable through its logarithm.
struct GeoFnoConfig {
    FnoConfig base; // fno2d stack; lift/projection act on the nodes
    std::size_t gx = 16, gy = 16;
    std::vector<std::size_t> deform_layers{32, 32};

    void validate() const {
        base.validate();
        if (base.variant != FnoVariant::fno2d)
            throw ParameterError("geo-fno: base stack must be fno2d");
        if (gx < 2 || gy < 2) throw ParameterError("geo-fno: latent grid too small");
    }
};

namespace geo_detail {

/// Latent grid cell centers, [gy*gx][2] in (x, y) order, row-major over rows y.
inline std::vector<std::array<double, 2>> grid_centers(std::size_t gx, std::size_t gy) {
    std::vector<std::array<double, 2>> pts(gx * gy);
    for (std::size_t iy = 0; iy < gy; ++iy)
        for (std::size_t ix = 0; ix < gx; ++ix)
            pts[iy * gx + ix] = {(double(ix) + 0.5) / double(gx),
                                 (double(iy) + 0.5) / double(gy)};
    return pts;
}

struct KernelCache {
    std::vector<double> w;   // [n, G]
    std::vector<double> den; // normalizer per output site
    double sigma = 0.0;
};

} // namespace geo_detail

/// Normalized kernel scatter: values [C, n] at latent coords [n, 2] onto the
/// [C, gy, gx] grid. Weights are normalized over nodes per grid point, so a
/// constant field maps to the same constant.
inline Var kernel_scatter(Tape& t, Var values, Var coords, Var log_bw, std::size_t gx,
                          std::size_t gy) {
    const Tensor& vv = t.value(values);
    const Tensor& cv = t.value(coords);
    if (vv.rank() != 2 || cv.rank() != 2 || cv.shape[1] != 2 || vv.shape[1] != cv.shape[0])
        throw ShapeError("kernel_scatter: values " + vv.shape_str() + " coords " +
                         cv.shape_str());
    const std::size_t C = vv.shape[0], n = vv.shape[1], G = gx * gy;
    const double sigma = std::exp(t.value(log_bw).v[0]);
    const auto centers = geo_detail::grid_centers(gx, gy);

    auto cache = std::make_shared<geo_detail::KernelCache>();
    cache->sigma = sigma;
    cache->w.resize(n * G);
    cache->den.assign(G, 1e-300);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = cv.v[2 * i], yi = cv.v[2 * i + 1];
        for (std::size_t g = 0; g < G; ++g) {
            const double dx = xi - centers[g][0], dy = yi - centers[g][1];
            const double w = std::exp(-(dx * dx + dy * dy) * inv2s2);
            cache->w[i * G + g] = w;
            cache->den[g] += w;
        }
    }

    Tensor out({C, gy, gx});
    for (std::size_t c = 0; c < C; ++c) {
        double* dst = out.v.data() + c * G;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = vv.v[c * n + i];
            const double* wi = cache->w.data() + i * G;
            for (std::size_t g = 0; g < G; ++g) dst[g] += wi[g] * v;
        }
        for (std::size_t g = 0; g < G; ++g) dst[g] /= cache->den[g];
    }

    const bool rg = t.needs_grad(values) || t.needs_grad(coords) || t.needs_grad(log_bw);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, values, coords, log_bw, cache, C, n, G, gx, gy](Tape& tp) {
            const Tensor& g = tp.grad(o);
            const Tensor& vv2 = tp.value(values);
            const Tensor& cv2 = tp.value(coords);
            const Tensor& gv = tp.value(o);
            const auto centers = geo_detail::grid_centers(gx, gy);
            const double sigma = cache->sigma;
            const double inv_s2 = 1.0 / (sigma * sigma);

            if (tp.needs_grad(values)) {
                auto& gval = tp.grad(values);
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t i = 0; i < n; ++i) {
                        const double* wi = cache->w.data() + i * G;
                        double acc = 0.0;
                        for (std::size_t gg = 0; gg < G; ++gg)
                            acc += wi[gg] / cache->den[gg] * g.v[c * G + gg];
                        gval.v[c * n + i] += acc;
                    }
            }
            if (tp.needs_grad(coords) || tp.needs_grad(log_bw)) {
                double dp = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double xi = cv2.v[2 * i], yi = cv2.v[2 * i + 1];
                    double dxi = 0.0, dyi = 0.0;
                    const double* wi = cache->w.data() + i * G;
                    for (std::size_t gg = 0; gg < G; ++gg) {
                        // T = dL/dw_ig
                        double T = 0.0;
                        for (std::size_t c = 0; c < C; ++c)
                            T += g.v[c * G + gg] * (vv2.v[c * n + i] - gv.v[c * G + gg]);
                        T /= cache->den[gg];
                        const double dx = centers[gg][0] - xi, dy = centers[gg][1] - yi;
                        const double tw = T * wi[gg];
                        dxi += tw * dx * inv_s2;
                        dyi += tw * dy * inv_s2;
                        dp += tw * (dx * dx + dy * dy) * inv_s2;
                    }
                    if (tp.needs_grad(coords)) {
                        tp.grad(coords).v[2 * i] += dxi;
                        tp.grad(coords).v[2 * i + 1] += dyi;
                    }
                }
                if (tp.needs_grad(log_bw)) tp.grad(log_bw).v[0] += dp;
            }
        });
    return o;
}

/// Normalized kernel gather: grid [C, gy, gx] back to node values [C, n];
/// weights normalized over grid points per node.
inline Var kernel_gather(Tape& t, Var grid, Var coords, Var log_bw) {
    const Tensor& gvv = t.value(grid);
    const Tensor& cv = t.value(coords);
    if (gvv.rank() != 3 || cv.rank() != 2 || cv.shape[1] != 2)
        throw ShapeError("kernel_gather: grid " + gvv.shape_str() + " coords " +
                         cv.shape_str());
    const std::size_t C = gvv.shape[0], gy = gvv.shape[1], gx = gvv.shape[2];
    const std::size_t G = gx * gy, n = cv.shape[0];
    const double sigma = std::exp(t.value(log_bw).v[0]);
    const auto centers = geo_detail::grid_centers(gx, gy);

    auto cache = std::make_shared<geo_detail::KernelCache>();
    cache->sigma = sigma;
    cache->w.resize(n * G);
    cache->den.assign(n, 1e-300);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = cv.v[2 * i], yi = cv.v[2 * i + 1];
        for (std::size_t g = 0; g < G; ++g) {
            const double dx = xi - centers[g][0], dy = yi - centers[g][1];
            const double w = std::exp(-(dx * dx + dy * dy) * inv2s2);
            cache->w[i * G + g] = w;
            cache->den[i] += w;
        }
    }

    Tensor out({C, n});
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            const double* wi = cache->w.data() + i * G;
            const double* src = gvv.v.data() + c * G;
            double acc = 0.0;
            for (std::size_t g = 0; g < G; ++g) acc += wi[g] * src[g];
            out.v[c * n + i] = acc / cache->den[i];
        }

    const bool rg = t.needs_grad(grid) || t.needs_grad(coords) || t.needs_grad(log_bw);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, grid, coords, log_bw, cache, C, n, G, gx, gy](Tape& tp) {
            const Tensor& g = tp.grad(o);
            const Tensor& grid2 = tp.value(grid);
            const Tensor& cv2 = tp.value(coords);
            const Tensor& uv = tp.value(o);
            const auto centers = geo_detail::grid_centers(gx, gy);
            const double sigma = cache->sigma;
            const double inv_s2 = 1.0 / (sigma * sigma);

            if (tp.needs_grad(grid)) {
                auto& ggrid = tp.grad(grid);
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t i = 0; i < n; ++i) {
                        const double gu = g.v[c * n + i];
                        if (gu == 0.0) continue;
                        const double* wi = cache->w.data() + i * G;
                        double* dst = ggrid.v.data() + c * G;
                        const double inv_den = 1.0 / cache->den[i];
                        for (std::size_t gg = 0; gg < G; ++gg)
                            dst[gg] += gu * wi[gg] * inv_den;
                    }
            }
            if (tp.needs_grad(coords) || tp.needs_grad(log_bw)) {
                double dp = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double xi = cv2.v[2 * i], yi = cv2.v[2 * i + 1];
                    double dxi = 0.0, dyi = 0.0;
                    const double* wi = cache->w.data() + i * G;
                    const double inv_den = 1.0 / cache->den[i];
                    for (std::size_t gg = 0; gg < G; ++gg) {
                        double U = 0.0;
                        for (std::size_t c = 0; c < C; ++c)
                            U += g.v[c * n + i] * (grid2.v[c * G + gg] - uv.v[c * n + i]);
                        U *= inv_den;
                        const double dx = centers[gg][0] - xi, dy = centers[gg][1] - yi;
                        const double uw = U * wi[gg];
                        dxi += uw * dx * inv_s2;
                        dyi += uw * dy * inv_s2;
                        dp += uw * (dx * dx + dy * dy) * inv_s2;
                    }
                    if (tp.needs_grad(coords)) {
                        tp.grad(coords).v[2 * i] += dxi;
                        tp.grad(coords).v[2 * i + 1] += dyi;
                    }
                }
                if (tp.needs_grad(log_bw)) tp.grad(log_bw).v[0] += dp;
            }
        });
    return o;
}

inline void geofno_append_layout(ParamLayout& lay, const GeoFnoConfig& cfg) {
    cfg.validate();
    std::vector<std::size_t> dd{2};
    dd.insert(dd.end(), cfg.deform_layers.begin(), cfg.deform_layers.end());
    dd.push_back(2);
    for (std::size_t i = 0; i + 1 < dd.size(); ++i) {
        lay.add("deform" + std::to_string(i) + ".w", {dd[i + 1], dd[i]});
        lay.add("deform" + std::to_string(i) + ".b", {dd[i + 1]});
    }
    lay.add("log_bw", {1});
    fno_append_layout(lay, cfg.base, "base.");
}

/// Learned coordinate map: identity plus a small MLP correction. With the
/// final deform layer zero-initialized this is exactly the identity at start.
inline Var geo_deform(Tape& t, const GeoFnoConfig& cfg, Params& P, Var phys_coords) {
    Var h = phys_coords;
    const std::size_t n_layers = cfg.deform_layers.size() + 1;
    for (std::size_t i = 0; i < n_layers; ++i) {
        h = linear_rows(t, h, P("deform" + std::to_string(i) + ".w"),
                        P("deform" + std::to_string(i) + ".b"));
        if (i + 1 < n_layers) h = elem(t, h, ElemFun::tanh_fn);
    }
    return add(t, phys_coords, h);
}

/// Full pipeline on node channels x: [in_channels, n_nodes].
inline Var geofno_forward(Tape& t, const GeoFnoConfig& cfg, Params& P, Var x,
                          Var phys_coords) {
    const Tensor& xv = t.value(x);
    if (xv.rank() != 2 || xv.shape[0] != cfg.base.in_channels)
        throw ShapeError("geofno_forward: input " + xv.shape_str());

    Var latent = geo_deform(t, cfg, P, phys_coords);
    Var z = channel_linear(t, x, P("base.lift.w"), P("base.lift.b"));
    Var grid = kernel_scatter(t, z, latent, P("log_bw"), cfg.gx, cfg.gy);
    for (std::size_t i = 0; i < cfg.base.layers.size(); ++i) {
        const auto& l = cfg.base.layers[i];
        const std::string p = "base.layer" + std::to_string(i) + ".";
        Var s = spectral_mix(t, grid, P(p + "spec_re"), P(p + "spec_im"), l.modes);
        if (l.residual)
            s = add(t, s, channel_linear(t, grid, P(p + "res_w"), P(p + "res_b")));
        grid = elem(t, s, to_elem(l.activation));
    }
    Var nodes = kernel_gather(t, grid, latent, P("log_bw"));
    Var h = elem(t, channel_linear(t, nodes, P("base.proj1.w"), P("base.proj1.b")),
                 ElemFun::gelu);
    return channel_linear(t, h, P("base.proj2.w"), P("base.proj2.b"));
}

inline void geofno_init_params(std::vector<double>& theta, const ParamLayout& lay,
                               const GeoFnoConfig& cfg, GaussianStream& g) {
    const std::size_t last_deform = cfg.deform_layers.size();
    for (const auto& seg : lay.segs) {
        if (seg.name == "log_bw") {
            theta[seg.offset] = std::log(1.2 / double(std::max(cfg.gx, cfg.gy)));
        } else if (seg.name.rfind("deform", 0) == 0) {
            const bool is_last =
                seg.name.rfind("deform" + std::to_string(last_deform) + ".", 0) == 0;
            if (is_last || seg.name.find(".b") != std::string::npos) {
                for (std::size_t i = 0; i < seg.size; ++i) theta[seg.offset + i] = 0.0;
            } else {
                init_xavier(theta, seg, g);
            }
        }
    }
    fno_init_params(theta, lay, g, "base.");
}

/// Smallest pairwise distance among latent node positions; a training-time
/// health metric for collapsing deformations.
inline double geo_min_latent_distance(const Tensor& latent) {
    const std::size_t n = latent.shape[0];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = latent.v[2 * i] - latent.v[2 * j];
            const double dy = latent.v[2 * i + 1] - latent.v[2 * j + 1];
            best = std::min(best, std::sqrt(dx * dx + dy * dy));
        }
    return best;
}

} // namespace waveop::nn
