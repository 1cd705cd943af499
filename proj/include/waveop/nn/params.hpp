#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "waveop/core/rng.hpp"
#include "waveop/nn/tape.hpp"

namespace waveop::nn {

/// Named segments of the flat parameter vector.
struct ParamSegment {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
};

struct ParamLayout {
    std::vector<ParamSegment> segs;
    std::size_t total = 0;

    void add(std::string name, std::vector<std::size_t> shape) {
        ParamSegment s;
        s.name = std::move(name);
        s.shape = std::move(shape);
        s.offset = total;
        s.size = Tensor::numel(s.shape);
        total += s.size;
        segs.push_back(std::move(s));
    }

    const ParamSegment& find(const std::string& name) const {
        for (const auto& s : segs)
            if (s.name == name) return s;
        throw ParameterError("unknown parameter segment: " + name);
    }
};

/// Binds a flat parameter vector onto a tape as leaf variables, one per
/// segment, created on first use. After backward(), collect() gathers the
/// leaf gradients back into a flat vector.
class Params {
public:
    Params(Tape& tape, const ParamLayout& layout, const std::vector<double>& theta,
           bool requires_grad = true)
        : tape_(tape), layout_(layout), theta_(theta), requires_grad_(requires_grad) {
        if (theta.size() != layout.total)
            throw ShapeError("Params: theta length does not match layout");
    }

    Var operator()(const std::string& name) {
        auto it = cache_.find(name);
        if (it != cache_.end()) return it->second;
        const auto& seg = layout_.find(name);
        Tensor t(seg.shape, std::vector<double>(theta_.begin() + long(seg.offset),
                                                theta_.begin() + long(seg.offset + seg.size)));
        Var v = tape_.leaf(std::move(t), requires_grad_);
        cache_.emplace(name, v);
        return v;
    }

    /// Accumulate leaf gradients into `grad` (sized layout.total).
    void collect(std::vector<double>& grad) const {
        for (const auto& [name, var] : cache_) {
            if (!tape_.has_grad(var)) continue;
            const auto& seg = layout_.find(name);
            const Tensor& g = const_cast<Tape&>(tape_).grad(var);
            for (std::size_t i = 0; i < seg.size; ++i) grad[seg.offset + i] += g.v[i];
        }
    }

private:
    Tape& tape_;
    const ParamLayout& layout_;
    const std::vector<double>& theta_;
    bool requires_grad_;
    std::map<std::string, Var> cache_;
};

/// Xavier-uniform weight initialization for a [out, in] matrix.
inline void init_xavier(std::vector<double>& theta, const ParamSegment& seg,
                        GaussianStream& g) {
    const std::size_t fan_out = seg.shape[0];
    const std::size_t fan_in = seg.shape.size() > 1 ? seg.shape[1] : 1;
    const double a = std::sqrt(6.0 / double(fan_in + fan_out));
    for (std::size_t i = 0; i < seg.size; ++i)
        theta[seg.offset + i] = a * (2.0 * g.uniform() - 1.0);
}

} // namespace waveop::nn
