#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "waveop/core/tensor.hpp"

namespace waveop::nn {

/// Reverse-mode autodiff over dense tensors. Values are computed eagerly;
/// each op attaches a closure that routes the output cotangent to its
/// parents. Node creation order is a topological order, so backward() is a
/// single reverse sweep. Graphs are small (hundreds of nodes) and rebuilt
/// per sample.
class Tape {
public:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        bool has_grad = false;
        std::function<void(Tape&)> backward;
    };

    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    Var leaf(Tensor value, bool requires_grad) { return make(std::move(value), requires_grad); }

    Var make(Tensor value, bool requires_grad) {
        nodes_.push_back(Node{std::move(value), {}, requires_grad, false, nullptr});
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    void set_backward(Var v, std::function<void(Tape&)> fn) {
        nodes_[std::size_t(v.id)].backward = std::move(fn);
    }

    const Tensor& value(Var v) const { return nodes_[std::size_t(v.id)].value; }
    bool needs_grad(Var v) const { return nodes_[std::size_t(v.id)].requires_grad; }

    /// Gradient tensor of a node, allocated on first touch.
    Tensor& grad(Var v) {
        auto& n = nodes_[std::size_t(v.id)];
        if (!n.has_grad) {
            n.grad = Tensor(n.value.shape);
            n.has_grad = true;
        }
        return n.grad;
    }

    bool has_grad(Var v) const { return nodes_[std::size_t(v.id)].has_grad; }

    /// Reverse sweep from a scalar output.
    void backward(Var out) {
        auto& o = nodes_[std::size_t(out.id)];
        if (o.value.size() != 1) throw ShapeError("backward: output must be scalar");
        grad(out).v[0] = 1.0;
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            auto& n = nodes_[i];
            if (n.has_grad && n.backward && n.requires_grad) n.backward(*this);
        }
    }

    void reset() { nodes_.clear(); }
    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
};

using Var = Tape::Var;

// ---------------------------------------------------------------------------
// elementwise

inline Var add(Tape& t, Var a, Var b) {
    require_same_shape(t.value(a), t.value(b), "add");
    Tensor out = t.value(a);
    const Tensor& bv = t.value(b);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += bv.v[i];
    const bool rg = t.needs_grad(a) || t.needs_grad(b);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, a, b](Tape& tp) {
            const Tensor& g = tp.grad(o);
            if (tp.needs_grad(a)) {
                auto& ga = tp.grad(a);
                for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
            }
            if (tp.needs_grad(b)) {
                auto& gb = tp.grad(b);
                for (std::size_t i = 0; i < g.size(); ++i) gb.v[i] += g.v[i];
            }
        });
    return o;
}

inline Var sub(Tape& t, Var a, Var b) {
    require_same_shape(t.value(a), t.value(b), "sub");
    Tensor out = t.value(a);
    const Tensor& bv = t.value(b);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] -= bv.v[i];
    const bool rg = t.needs_grad(a) || t.needs_grad(b);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, a, b](Tape& tp) {
            const Tensor& g = tp.grad(o);
            if (tp.needs_grad(a)) {
                auto& ga = tp.grad(a);
                for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
            }
            if (tp.needs_grad(b)) {
                auto& gb = tp.grad(b);
                for (std::size_t i = 0; i < g.size(); ++i) gb.v[i] -= g.v[i];
            }
        });
    return o;
}

inline Var hadamard(Tape& t, Var a, Var b) {
    require_same_shape(t.value(a), t.value(b), "hadamard");
    Tensor out = t.value(a);
    const Tensor& bv = t.value(b);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] *= bv.v[i];
    const bool rg = t.needs_grad(a) || t.needs_grad(b);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, a, b](Tape& tp) {
            const Tensor& g = tp.grad(o);
            const Tensor& av = tp.value(a);
            const Tensor& bv2 = tp.value(b);
            if (tp.needs_grad(a)) {
                auto& ga = tp.grad(a);
                for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * bv2.v[i];
            }
            if (tp.needs_grad(b)) {
                auto& gb = tp.grad(b);
                for (std::size_t i = 0; i < g.size(); ++i) gb.v[i] += g.v[i] * av.v[i];
            }
        });
    return o;
}

/// y = s * a + c (scalar broadcast); the workhorse for normalization.
inline Var affine_const(Tape& t, Var a, double s, double c) {
    Tensor out = t.value(a);
    for (auto& x : out.v) x = s * x + c;
    const bool rg = t.needs_grad(a);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, a, s](Tape& tp) {
            const Tensor& g = tp.grad(o);
            auto& ga = tp.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += s * g.v[i];
        });
    return o;
}

enum class ElemFun { identity, relu, gelu, tanh_fn, one_minus_cos, quartic_quarter };

inline double elem_eval(ElemFun f, double x) {
    switch (f) {
        case ElemFun::identity: return x;
        case ElemFun::relu: return x > 0.0 ? x : 0.0;
        case ElemFun::gelu:
            return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
        case ElemFun::tanh_fn: return std::tanh(x);
        case ElemFun::one_minus_cos: return 1.0 - std::cos(x);
        case ElemFun::quartic_quarter: return 0.25 * x * x * x * x;
    }
    return x;
}

inline double elem_deriv(ElemFun f, double x) {
    switch (f) {
        case ElemFun::identity: return 1.0;
        case ElemFun::relu: return x > 0.0 ? 1.0 : 0.0;
        case ElemFun::gelu: {
            const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
            const double pdf =
                std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
            return cdf + x * pdf;
        }
        case ElemFun::tanh_fn: {
            const double th = std::tanh(x);
            return 1.0 - th * th;
        }
        case ElemFun::one_minus_cos: return std::sin(x);
        case ElemFun::quartic_quarter: return x * x * x;
    }
    return 1.0;
}

inline Var elem(Tape& t, Var a, ElemFun f) {
    Tensor out = t.value(a);
    for (auto& x : out.v) x = elem_eval(f, x);
    const bool rg = t.needs_grad(a);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, a, f](Tape& tp) {
            const Tensor& g = tp.grad(o);
            const Tensor& av = tp.value(a);
            auto& ga = tp.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i)
                ga.v[i] += g.v[i] * elem_deriv(f, av.v[i]);
        });
    return o;
}

/// Smooth truncation to [-B, B]: y = B * tanh(x / B). The argument is scaled
/// so the map has unit slope at the origin regardless of the bound.
inline Var soft_clip(Tape& t, Var a, double B) {
    if (!(B > 0.0)) throw ParameterError("soft_clip: bound must be positive");
    Tensor out = t.value(a);
    for (auto& x : out.v) x = B * std::tanh(x / B);
    const bool rg = t.needs_grad(a);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, a, B](Tape& tp) {
            const Tensor& g = tp.grad(o);
            const Tensor& av = tp.value(a);
            auto& ga = tp.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double th = std::tanh(av.v[i] / B);
                ga.v[i] += g.v[i] * (1.0 - th * th);
            }
        });
    return o;
}

// ---------------------------------------------------------------------------
// linear algebra

/// Y = W X (+ b per output channel): X [Cin, S] -> Y [Cout, S].
inline Var channel_linear(Tape& t, Var X, Var W, Var b) {
    const Tensor& xv = t.value(X);
    const Tensor& wv = t.value(W);
    if (xv.rank() < 2 || wv.rank() != 2 || wv.shape[1] != xv.shape[0])
        throw ShapeError("channel_linear: W " + wv.shape_str() + " vs X " + xv.shape_str());
    const std::size_t cin = xv.shape[0];
    const std::size_t s = xv.size() / cin;
    const std::size_t cout = wv.shape[0];

    std::vector<std::size_t> oshape = xv.shape;
    oshape[0] = cout;
    Tensor out(oshape);
    for (std::size_t co = 0; co < cout; ++co) {
        double* dst = out.v.data() + co * s;
        const double bias = b.valid() ? t.value(b).v[co] : 0.0;
        for (std::size_t j = 0; j < s; ++j) dst[j] = bias;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const double w = wv.v[co * cin + ci];
            if (w == 0.0) continue;
            const double* src = xv.v.data() + ci * s;
            for (std::size_t j = 0; j < s; ++j) dst[j] += w * src[j];
        }
    }
    const bool rg = t.needs_grad(X) || t.needs_grad(W) || (b.valid() && t.needs_grad(b));
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, X, W, b, cin, cout, s](Tape& tp) {
            const Tensor& g = tp.grad(o);
            const Tensor& xv2 = tp.value(X);
            const Tensor& wv2 = tp.value(W);
            if (tp.needs_grad(X)) {
                auto& gx = tp.grad(X);
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    double* dst = gx.v.data() + ci * s;
                    for (std::size_t co = 0; co < cout; ++co) {
                        const double w = wv2.v[co * cin + ci];
                        const double* src = g.v.data() + co * s;
                        for (std::size_t j = 0; j < s; ++j) dst[j] += w * src[j];
                    }
                }
            }
            if (tp.needs_grad(W)) {
                auto& gw = tp.grad(W);
                for (std::size_t co = 0; co < cout; ++co)
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        const double* gs = g.v.data() + co * s;
                        const double* xs = xv2.v.data() + ci * s;
                        double acc = 0.0;
                        for (std::size_t j = 0; j < s; ++j) acc += gs[j] * xs[j];
                        gw.v[co * cin + ci] += acc;
                    }
            }
            if (b.valid() && tp.needs_grad(b)) {
                auto& gb = tp.grad(b);
                for (std::size_t co = 0; co < cout; ++co) {
                    const double* gs = g.v.data() + co * s;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < s; ++j) acc += gs[j];
                    gb.v[co] += acc;
                }
            }
        });
    return o;
}

/// Y = X W^T + b: X [R, in] -> Y [R, out]. MLP layer over a batch of rows.
inline Var linear_rows(Tape& t, Var X, Var W, Var b) {
    const Tensor& xv = t.value(X);
    const Tensor& wv = t.value(W);
    if (xv.rank() != 2 || wv.rank() != 2 || wv.shape[1] != xv.shape[1])
        throw ShapeError("linear_rows: W " + wv.shape_str() + " vs X " + xv.shape_str());
    const std::size_t rows = xv.shape[0], in = xv.shape[1], out_dim = wv.shape[0];
    Tensor out({rows, out_dim});
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = xv.v.data() + r * in;
        double* y = out.v.data() + r * out_dim;
        for (std::size_t oI = 0; oI < out_dim; ++oI) {
            const double* w = wv.v.data() + oI * in;
            double acc = b.valid() ? t.value(b).v[oI] : 0.0;
            for (std::size_t j = 0; j < in; ++j) acc += w[j] * x[j];
            y[oI] = acc;
        }
    }
    const bool rg = t.needs_grad(X) || t.needs_grad(W) || (b.valid() && t.needs_grad(b));
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, X, W, b, rows, in, out_dim](Tape& tp) {
            const Tensor& g = tp.grad(o);
            const Tensor& xv2 = tp.value(X);
            const Tensor& wv2 = tp.value(W);
            if (tp.needs_grad(X)) {
                auto& gx = tp.grad(X);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t oI = 0; oI < out_dim; ++oI) {
                        const double gv = g.v[r * out_dim + oI];
                        if (gv == 0.0) continue;
                        const double* w = wv2.v.data() + oI * in;
                        double* dst = gx.v.data() + r * in;
                        for (std::size_t j = 0; j < in; ++j) dst[j] += gv * w[j];
                    }
            }
            if (tp.needs_grad(W)) {
                auto& gw = tp.grad(W);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t oI = 0; oI < out_dim; ++oI) {
                        const double gv = g.v[r * out_dim + oI];
                        if (gv == 0.0) continue;
                        const double* x = xv2.v.data() + r * in;
                        double* dst = gw.v.data() + oI * in;
                        for (std::size_t j = 0; j < in; ++j) dst[j] += gv * x[j];
                    }
            }
            if (b.valid() && tp.needs_grad(b)) {
                auto& gb = tp.grad(b);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t oI = 0; oI < out_dim; ++oI)
                        gb.v[oI] += g.v[r * out_dim + oI];
            }
        });
    return o;
}

// ---------------------------------------------------------------------------
// shape plumbing

inline Var reshape(Tape& t, Var a, std::vector<std::size_t> shape) {
    if (Tensor::numel(shape) != t.value(a).size())
        throw ShapeError("reshape: element count mismatch");
    Tensor out(std::move(shape), t.value(a).v);
    const bool rg = t.needs_grad(a);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, a](Tape& tp) {
            const Tensor& g = tp.grad(o);
            auto& ga = tp.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        });
    return o;
}

/// Rows [r0, r1) along axis 0.
inline Var slice0(Tape& t, Var a, std::size_t r0, std::size_t r1) {
    const Tensor& av = t.value(a);
    if (r1 > av.shape[0] || r0 >= r1) throw ShapeError("slice0: bad range");
    const std::size_t inner = av.size() / av.shape[0];
    std::vector<std::size_t> shape = av.shape;
    shape[0] = r1 - r0;
    Tensor out(shape);
    std::copy(av.v.begin() + long(r0 * inner), av.v.begin() + long(r1 * inner),
              out.v.begin());
    const bool rg = t.needs_grad(a);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, a, r0, inner](Tape& tp) {
            const Tensor& g = tp.grad(o);
            auto& ga = tp.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga.v[r0 * inner + i] += g.v[i];
        });
    return o;
}

inline Var concat0(Tape& t, Var a, Var b) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    if (av.rank() != bv.rank()) throw ShapeError("concat0: rank mismatch");
    for (std::size_t d = 1; d < av.rank(); ++d)
        if (av.shape[d] != bv.shape[d]) throw ShapeError("concat0: trailing dims differ");
    std::vector<std::size_t> shape = av.shape;
    shape[0] += bv.shape[0];
    Tensor out(shape);
    std::copy(av.v.begin(), av.v.end(), out.v.begin());
    std::copy(bv.v.begin(), bv.v.end(), out.v.begin() + long(av.size()));
    const bool rg = t.needs_grad(a) || t.needs_grad(b);
    Var o = t.make(std::move(out), rg);
    if (rg) {
        const std::size_t na = av.size();
        t.set_backward(o, [o, a, b, na](Tape& tp) {
            const Tensor& g = tp.grad(o);
            if (tp.needs_grad(a)) {
                auto& ga = tp.grad(a);
                for (std::size_t i = 0; i < na; ++i) ga.v[i] += g.v[i];
            }
            if (tp.needs_grad(b)) {
                auto& gb = tp.grad(b);
                for (std::size_t i = 0; i < gb.size(); ++i) gb.v[i] += g.v[na + i];
            }
        });
    }
    return o;
}

inline Var stack_scalars(Tape& t, const std::vector<Var>& xs) {
    Tensor out({xs.size()});
    for (std::size_t i = 0; i < xs.size(); ++i) out.v[i] = t.value(xs[i]).v[0];
    bool rg = false;
    for (Var v : xs) rg = rg || t.needs_grad(v);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, xs](Tape& tp) {
            const Tensor& g = tp.grad(o);
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (tp.needs_grad(xs[i])) tp.grad(xs[i]).v[0] += g.v[i];
        });
    return o;
}

// ---------------------------------------------------------------------------
// reductions & losses

inline Var sum(Tape& t, Var a) {
    double s = 0.0;
    for (double x : t.value(a).v) s += x;
    const bool rg = t.needs_grad(a);
    Var o = t.make(Tensor::scalar(s), rg);
    if (rg)
        t.set_backward(o, [o, a](Tape& tp) {
            const double g = tp.grad(o).v[0];
            auto& ga = tp.grad(a);
            for (auto& x : ga.v) x += g;
        });
    return o;
}

/// <a, w> with a constant weight vector.
inline Var dot_const(Tape& t, Var a, Tensor w) {
    require_same_shape(t.value(a), w, "dot_const");
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += t.value(a).v[i] * w.v[i];
    const bool rg = t.needs_grad(a);
    Var o = t.make(Tensor::scalar(s), rg);
    if (rg)
        t.set_backward(o, [o, a, w = std::move(w)](Tape& tp) {
            const double g = tp.grad(o).v[0];
            auto& ga = tp.grad(a);
            for (std::size_t i = 0; i < w.size(); ++i) ga.v[i] += g * w.v[i];
        });
    return o;
}

/// ||pred - target||_2 / ||target||_2 over all elements.
inline Var relative_l2(Tape& t, Var pred, Tensor target) {
    require_same_shape(t.value(pred), target, "relative_l2");
    double num = 0.0, den = 0.0;
    const Tensor& pv = t.value(pred);
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = pv.v[i] - target.v[i];
        num += d * d;
        den += target.v[i] * target.v[i];
    }
    const double nn = std::sqrt(num), dd = std::sqrt(den);
    if (dd == 0.0) throw ParameterError("relative_l2: zero-norm target");
    const bool rg = t.needs_grad(pred);
    Var o = t.make(Tensor::scalar(nn / dd), rg);
    if (rg)
        t.set_backward(o, [o, pred, target = std::move(target), nn, dd](Tape& tp) {
            const double g = tp.grad(o).v[0];
            const Tensor& pv2 = tp.value(pred);
            auto& gp = tp.grad(pred);
            if (nn == 0.0) return; // subgradient 0 at the minimum
            const double c = g / (nn * dd);
            for (std::size_t i = 0; i < target.size(); ++i)
                gp.v[i] += c * (pv2.v[i] - target.v[i]);
        });
    return o;
}

inline Var mse(Tape& t, Var pred, Tensor target) {
    require_same_shape(t.value(pred), target, "mse");
    const std::size_t n = target.size();
    double s = 0.0;
    const Tensor& pv = t.value(pred);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pv.v[i] - target.v[i];
        s += d * d;
    }
    const bool rg = t.needs_grad(pred);
    Var o = t.make(Tensor::scalar(s / double(n)), rg);
    if (rg)
        t.set_backward(o, [o, pred, target = std::move(target), n](Tape& tp) {
            const double g = tp.grad(o).v[0];
            const Tensor& pv2 = tp.value(pred);
            auto& gp = tp.grad(pred);
            for (std::size_t i = 0; i < n; ++i)
                gp.v[i] += g * 2.0 * (pv2.v[i] - target.v[i]) / double(n);
        });
    return o;
}

// ---------------------------------------------------------------------------
// constant linear maps (derivative stencils, quadrature-weighted operators)

/// Sparse constant matrix with a prebuilt transpose for the adjoint pass.
struct LinearMap {
    std::size_t n_out = 0, n_in = 0;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;     // out <- in
    std::vector<std::vector<std::pair<std::size_t, double>>> rows_t;   // in <- out

    static LinearMap from_rows(std::size_t n_out, std::size_t n_in,
                               std::vector<std::vector<std::pair<std::size_t, double>>> r) {
        LinearMap m;
        m.n_out = n_out;
        m.n_in = n_in;
        m.rows = std::move(r);
        m.rows_t.resize(n_in);
        for (std::size_t i = 0; i < m.rows.size(); ++i)
            for (const auto& [j, w] : m.rows[i]) m.rows_t[j].emplace_back(i, w);
        return m;
    }
};

/// y = M a where a is flattened; output keeps the provided shape.
inline Var apply_map(Tape& t, Var a, const LinearMap& m, std::vector<std::size_t> out_shape) {
    const Tensor& av = t.value(a);
    if (av.size() != m.n_in) throw ShapeError("apply_map: input size mismatch");
    if (Tensor::numel(out_shape) != m.n_out) throw ShapeError("apply_map: output size mismatch");
    Tensor out(std::move(out_shape));
    for (std::size_t i = 0; i < m.n_out; ++i) {
        double s = 0.0;
        for (const auto& [j, w] : m.rows[i]) s += w * av.v[j];
        out.v[i] = s;
    }
    const bool rg = t.needs_grad(a);
    Var o = t.make(std::move(out), rg);
    if (rg)
        t.set_backward(o, [o, a, &m](Tape& tp) {
            const Tensor& g = tp.grad(o);
            auto& ga = tp.grad(a);
            for (std::size_t j = 0; j < m.n_in; ++j) {
                double s = 0.0;
                for (const auto& [i, w] : m.rows_t[j]) s += w * g.v[i];
                ga.v[j] += s;
            }
        });
    return o;
}

} // namespace waveop::nn
