#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "waveop/nn/tape.hpp"

namespace waveop::nn {

// Truncated-DFT spectral mixing layer.
//
// The forward map analyzes the input along each spatial axis onto a small set
// of retained frequencies (the last axis keeps the Hermitian half 0..m-1,
// other axes keep the signed set 0,..,m-1,-(m-1),..,-1), applies one complex
// channel-mixing matrix per retained multi-frequency, and synthesizes back to
// the grid taking the real part with Hermitian doubling along the last axis.
// Working directly with the truncated basis keeps the op linear in
// grid-size * modes, makes the adjoint exact, and is resolution independent
// because frequencies (not bins) are retained.

namespace spectral_detail {

struct AxisTable {
    std::size_t n = 0, K = 0;
    bool last = false;
    // K x n analysis exp(-2 pi i f j / n); row-major [k][j]
    std::vector<double> a_re, a_im;
    // n x K synthesis; non-last: exp(+2 pi i f j / n)/n; last: (d_k/n) twiddles
    std::vector<double> s_re, s_im;
    std::vector<double> doubling; // d_k for the last axis
};

inline std::shared_ptr<const AxisTable> axis_table(std::size_t n, std::size_t m, bool last) {
    static std::mutex mu;
    static std::map<std::tuple<std::size_t, std::size_t, bool>, std::shared_ptr<const AxisTable>>
        cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(n, m, last);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    auto t = std::make_shared<AxisTable>();
    t->n = n;
    t->last = last;
    std::vector<double> freqs;
    if (last) {
        if (m < 1 || m > n / 2 + 1)
            throw ParameterError("spectral: retained modes exceed the Nyquist limit");
        for (std::size_t k = 0; k < m; ++k) freqs.push_back(double(k));
        t->doubling.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            const bool self_conjugate = (k == 0) || (2 * k == n);
            t->doubling[k] = self_conjugate ? 1.0 : 2.0;
        }
    } else {
        if (m < 1 || 2 * m - 1 > n)
            throw ParameterError("spectral: signed mode set exceeds the axis length");
        for (std::size_t k = 0; k < m; ++k) freqs.push_back(double(k));
        for (std::size_t k = m - 1; k >= 1; --k) freqs.push_back(-double(k));
    }
    const std::size_t K = freqs.size();
    t->K = K;
    t->a_re.resize(K * n);
    t->a_im.resize(K * n);
    t->s_re.resize(n * K);
    t->s_im.resize(n * K);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = 2.0 * std::numbers::pi * freqs[k] * double(j) / double(n);
            t->a_re[k * n + j] = std::cos(ang);
            t->a_im[k * n + j] = -std::sin(ang);
            const double scale = (last ? t->doubling[k] : 1.0) / double(n);
            t->s_re[j * K + k] = scale * std::cos(ang);
            t->s_im[j * K + k] = scale * std::sin(ang);
        }
    cache[key] = t;
    return t;
}

/// out[o,k,i] = sum_j (Mre+iMim)[k,j] * in[o,j,i]; complex to complex.
inline void transform_axis(const double* in_re, const double* in_im, double* out_re,
                           double* out_im, std::size_t outer, std::size_t len_in,
                           std::size_t len_out, std::size_t inner, const double* m_re,
                           const double* m_im, bool transpose_conj) {
    const std::size_t os_in = len_in * inner, os_out = len_out * inner;
    for (std::size_t o = 0; o < outer; ++o) {
        double* yr = out_re + o * os_out;
        double* yi = out_im + o * os_out;
        std::fill(yr, yr + os_out, 0.0);
        std::fill(yi, yi + os_out, 0.0);
        for (std::size_t k = 0; k < len_out; ++k) {
            for (std::size_t j = 0; j < len_in; ++j) {
                double mr, mi;
                if (!transpose_conj) {
                    mr = m_re[k * len_in + j];
                    mi = m_im[k * len_in + j];
                } else {
                    // adjoint: conj(M)[j,k]
                    mr = m_re[j * len_out + k];
                    mi = -m_im[j * len_out + k];
                }
                const double* xr = in_re + o * os_in + j * inner;
                const double* xi = in_im + o * os_in + j * inner;
                double* tr = yr + k * inner;
                double* ti = yi + k * inner;
                for (std::size_t i = 0; i < inner; ++i) {
                    tr[i] += mr * xr[i] - mi * xi[i];
                    ti[i] += mr * xi[i] + mi * xr[i];
                }
            }
        }
    }
}

struct Plan {
    std::vector<std::size_t> sizes;  // spatial sizes
    std::vector<std::size_t> modes;  // requested modes per axis
    std::vector<std::shared_ptr<const AxisTable>> tables;
    std::size_t total_modes = 1;

    Plan(const std::vector<std::size_t>& spatial, const std::vector<std::size_t>& m) {
        sizes = spatial;
        modes = m;
        if (sizes.size() != modes.size() || sizes.empty())
            throw ShapeError("spectral: modes list must match spatial rank");
        for (std::size_t a = 0; a < sizes.size(); ++a) {
            tables.push_back(axis_table(sizes[a], modes[a], a + 1 == sizes.size()));
            total_modes *= tables[a]->K;
        }
    }
};

/// Analysis of a real [C, spatial...] array onto [C, total_modes] complex.
inline void analyze(const Plan& p, const double* x, std::size_t channels, CTensor& out) {
    const std::size_t d = p.sizes.size();
    std::vector<std::size_t> dims = p.sizes;
    std::size_t n_sp = 1;
    for (auto s : dims) n_sp *= s;

    // last axis: real -> complex
    {
        const auto& t = *p.tables[d - 1];
        const std::size_t outer = channels * n_sp / dims[d - 1];
        CTensor next({outer * t.K});
        for (std::size_t o = 0; o < outer; ++o) {
            const double* xs = x + o * dims[d - 1];
            double* yr = next.re.data() + o * t.K;
            double* yi = next.im.data() + o * t.K;
            for (std::size_t k = 0; k < t.K; ++k) {
                double ar = 0.0, ai = 0.0;
                const double* mr = t.a_re.data() + k * t.n;
                const double* mi = t.a_im.data() + k * t.n;
                for (std::size_t j = 0; j < t.n; ++j) {
                    ar += mr[j] * xs[j];
                    ai += mi[j] * xs[j];
                }
                yr[k] = ar;
                yi[k] = ai;
            }
        }
        out = std::move(next);
        dims[d - 1] = t.K;
    }
    // remaining axes: complex -> complex
    for (std::size_t a = d - 1; a-- > 0;) {
        const auto& t = *p.tables[a];
        std::size_t outer = channels, inner = 1;
        for (std::size_t q = 0; q < a; ++q) outer *= dims[q];
        for (std::size_t q = a + 1; q < d; ++q) inner *= dims[q];
        CTensor next({outer * t.K * inner});
        transform_axis(out.re.data(), out.im.data(), next.re.data(), next.im.data(), outer,
                       dims[a], t.K, inner, t.a_re.data(), t.a_im.data(), false);
        out = std::move(next);
        dims[a] = t.K;
    }
}

/// Adjoint of analyze: complex cotangent [C, total_modes] -> real [C, spatial...].
inline void analyze_adjoint(const Plan& p, const CTensor& gbar, std::size_t channels,
                            double* gx) {
    const std::size_t d = p.sizes.size();
    std::vector<std::size_t> dims(d);
    for (std::size_t a = 0; a < d; ++a) dims[a] = p.tables[a]->K;
    CTensor cur = gbar;
    // undo the non-last axes in reverse order of application (0 was last applied)
    for (std::size_t a = 0; a + 1 < d; ++a) {
        const auto& t = *p.tables[a];
        std::size_t outer = channels, inner = 1;
        for (std::size_t q = 0; q < a; ++q) outer *= p.sizes[q];
        for (std::size_t q = a + 1; q < d; ++q) inner *= dims[q];
        CTensor next({outer * t.n * inner});
        transform_axis(cur.re.data(), cur.im.data(), next.re.data(), next.im.data(), outer,
                       t.K, t.n, inner, t.a_re.data(), t.a_im.data(), true);
        cur = std::move(next);
        dims[a] = t.n;
    }
    // last axis: d_x[j] = Re( sum_k g_k exp(+2 pi i k j / n) )
    {
        const auto& t = *p.tables[d - 1];
        std::size_t outer = channels;
        for (std::size_t q = 0; q + 1 < d; ++q) outer *= p.sizes[q];
        for (std::size_t o = 0; o < outer; ++o) {
            const double* gr = cur.re.data() + o * t.K;
            const double* gi = cur.im.data() + o * t.K;
            double* dst = gx + o * t.n;
            for (std::size_t j = 0; j < t.n; ++j) {
                double acc = 0.0;
                const double* mr = t.a_re.data();
                const double* mi = t.a_im.data();
                // exp(+i ang) has cos = a_re, sin = -a_im
                for (std::size_t k = 0; k < t.K; ++k)
                    acc += gr[k] * mr[k * t.n + j] + gi[k] * mi[k * t.n + j];
                dst[j] += acc;
            }
        }
    }
}

/// Synthesis of [C, total_modes] complex onto a real [C, spatial...] array.
inline void synthesize(const Plan& p, const CTensor& zin, std::size_t channels, double* y) {
    const std::size_t d = p.sizes.size();
    std::vector<std::size_t> dims(d);
    for (std::size_t a = 0; a < d; ++a) dims[a] = p.tables[a]->K;
    CTensor cur = zin;
    for (std::size_t a = 0; a + 1 < d; ++a) {
        const auto& t = *p.tables[a];
        std::size_t outer = channels, inner = 1;
        for (std::size_t q = 0; q < a; ++q) outer *= p.sizes[q];
        for (std::size_t q = a + 1; q < d; ++q) inner *= dims[q];
        CTensor next({outer * t.n * inner});
        // synthesis table is stored [j][k]
        transform_axis(cur.re.data(), cur.im.data(), next.re.data(), next.im.data(), outer,
                       t.K, t.n, inner, t.s_re.data(), t.s_im.data(), false);
        cur = std::move(next);
        dims[a] = t.n;
    }
    {
        const auto& t = *p.tables[d - 1];
        std::size_t outer = channels;
        for (std::size_t q = 0; q + 1 < d; ++q) outer *= p.sizes[q];
        for (std::size_t o = 0; o < outer; ++o) {
            const double* zr = cur.re.data() + o * t.K;
            const double* zi = cur.im.data() + o * t.K;
            double* dst = y + o * t.n;
            for (std::size_t j = 0; j < t.n; ++j) {
                double acc = 0.0;
                const double* sr = t.s_re.data() + j * t.K;
                const double* si = t.s_im.data() + j * t.K;
                // Re{ z * exp(+i ang) } summed with doubling/normalization
                for (std::size_t k = 0; k < t.K; ++k) acc += zr[k] * sr[k] - zi[k] * si[k];
                dst[j] = acc;
            }
        }
    }
}

/// Adjoint of synthesize: real cotangent -> complex mode cotangent.
inline void synthesize_adjoint(const Plan& p, const double* gy, std::size_t channels,
                               CTensor& gz) {
    const std::size_t d = p.sizes.size();
    std::vector<std::size_t> dims = p.sizes;
    // last axis adjoint: dZ_k = (d_k/n) sum_j gy_j exp(-2 pi i k j/n)
    CTensor cur;
    {
        const auto& t = *p.tables[d - 1];
        std::size_t outer = channels;
        for (std::size_t q = 0; q + 1 < d; ++q) outer *= p.sizes[q];
        cur = CTensor({outer * t.K});
        for (std::size_t o = 0; o < outer; ++o) {
            const double* gs = gy + o * t.n;
            double* zr = cur.re.data() + o * t.K;
            double* zi = cur.im.data() + o * t.K;
            for (std::size_t k = 0; k < t.K; ++k) {
                double ar = 0.0, ai = 0.0;
                const double* sr = t.s_re.data();
                const double* si = t.s_im.data();
                for (std::size_t j = 0; j < t.n; ++j) {
                    // conj of the synthesis twiddle, including its scale
                    ar += gs[j] * sr[j * t.K + k];
                    ai -= gs[j] * si[j * t.K + k];
                }
                zr[k] = ar;
                zi[k] = ai;
            }
        }
        dims[d - 1] = t.K;
    }
    for (std::size_t a = d - 1; a-- > 0;) {
        const auto& t = *p.tables[a];
        std::size_t outer = channels, inner = 1;
        for (std::size_t q = 0; q < a; ++q) outer *= p.sizes[q];
        for (std::size_t q = a + 1; q < d; ++q) inner *= dims[q];
        CTensor next({outer * t.K * inner});
        transform_axis(cur.re.data(), cur.im.data(), next.re.data(), next.im.data(), outer,
                       t.n, t.K, inner, t.s_re.data(), t.s_im.data(), true);
        cur = std::move(next);
        dims[a] = t.K;
    }
    gz = std::move(cur);
}

} // namespace spectral_detail

inline std::size_t spectral_mode_count(const std::vector<std::size_t>& spatial,
                                       const std::vector<std::size_t>& modes) {
    spectral_detail::Plan p(spatial, modes);
    return p.total_modes;
}

/// Core spectral channel-mixing op. x: [Cin, spatial...], weights:
/// [M, Cout, Cin] real and imaginary parts, output [Cout, spatial...].
inline Var spectral_mix(Tape& t, Var x, Var w_re, Var w_im,
                        const std::vector<std::size_t>& modes) {
    using namespace spectral_detail;
    const Tensor& xv = t.value(x);
    if (xv.rank() < 2) throw ShapeError("spectral_mix: input must be [C, spatial...]");
    const std::size_t cin = xv.shape[0];
    std::vector<std::size_t> spatial(xv.shape.begin() + 1, xv.shape.end());
    auto plan = std::make_shared<Plan>(spatial, modes);
    const std::size_t M = plan->total_modes;

    const Tensor& wr = t.value(w_re);
    if (wr.rank() != 3 || wr.shape[0] != M || wr.shape[2] != cin)
        throw ShapeError("spectral_mix: weight shape " + wr.shape_str() +
                         " does not match modes/channels");
    const std::size_t cout = wr.shape[1];

    auto xhat = std::make_shared<CTensor>();
    analyze(*plan, xv.v.data(), cin, *xhat);

    // mix: yhat[co, m] = sum_ci W[m, co, ci] * xhat[ci, m]
    auto yhat = std::make_shared<CTensor>(std::vector<std::size_t>{cout * M});
    {
        const Tensor& wi = t.value(w_im);
        for (std::size_t mj = 0; mj < M; ++mj) {
            const double* wrp = wr.v.data() + mj * cout * cin;
            const double* wip = wi.v.data() + mj * cout * cin;
            for (std::size_t co = 0; co < cout; ++co) {
                double ar = 0.0, ai = 0.0;
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    const double xr = xhat->re[ci * M + mj];
                    const double xi = xhat->im[ci * M + mj];
                    const double mr = wrp[co * cin + ci];
                    const double mi = wip[co * cin + ci];
                    ar += mr * xr - mi * xi;
                    ai += mr * xi + mi * xr;
                }
                yhat->re[co * M + mj] = ar;
                yhat->im[co * M + mj] = ai;
            }
        }
    }

    std::vector<std::size_t> oshape = xv.shape;
    oshape[0] = cout;
    Tensor out(oshape);
    synthesize(*plan, *yhat, cout, out.v.data());

    const bool rg = t.needs_grad(x) || t.needs_grad(w_re) || t.needs_grad(w_im);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, x, w_re, w_im, plan, xhat, M, cin, cout](Tape& tp) {
            const Tensor& g = tp.grad(o);
            CTensor gyhat;
            synthesize_adjoint(*plan, g.v.data(), cout, gyhat);

            const Tensor& wr2 = tp.value(w_re);
            const Tensor& wi2 = tp.value(w_im);
            if (tp.needs_grad(w_re) || tp.needs_grad(w_im)) {
                auto& gwr = tp.grad(w_re);
                auto& gwi = tp.grad(w_im);
                // dW[m,co,ci] = gy[co,m] * conj(xhat[ci,m])
                for (std::size_t mj = 0; mj < M; ++mj)
                    for (std::size_t co = 0; co < cout; ++co) {
                        const double gr = gyhat.re[co * M + mj];
                        const double gi = gyhat.im[co * M + mj];
                        for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double xr = xhat->re[ci * M + mj];
                            const double xi = xhat->im[ci * M + mj];
                            gwr.v[(mj * cout + co) * cin + ci] += gr * xr + gi * xi;
                            gwi.v[(mj * cout + co) * cin + ci] += gi * xr - gr * xi;
                        }
                    }
            }
            if (tp.needs_grad(x)) {
                // dxhat[ci,m] = sum_co conj(W[m,co,ci]) * gy[co,m]
                CTensor gxhat(std::vector<std::size_t>{cin * M});
                for (std::size_t mj = 0; mj < M; ++mj) {
                    const double* wrp = wr2.v.data() + mj * cout * cin;
                    const double* wip = wi2.v.data() + mj * cout * cin;
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        double ar = 0.0, ai = 0.0;
                        for (std::size_t co = 0; co < cout; ++co) {
                            const double gr = gyhat.re[co * M + mj];
                            const double gi = gyhat.im[co * M + mj];
                            const double mr = wrp[co * cin + ci];
                            const double mi = wip[co * cin + ci];
                            ar += mr * gr + mi * gi;
                            ai += mr * gi - mi * gr;
                        }
                        gxhat.re[ci * M + mj] = ar;
                        gxhat.im[ci * M + mj] = ai;
                    }
                }
                analyze_adjoint(*plan, gxhat, cin, tp.grad(x).v.data());
            }
        });
    return o;
}

} // namespace waveop::nn
