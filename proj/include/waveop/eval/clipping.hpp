#pragma once

#include <cmath>
#include <string>

#include "waveop/core/tensor.hpp"

namespace waveop::eval {

enum class ClipMode { none, hard, soft };

inline std::string clip_mode_name(ClipMode m) {
    switch (m) {
        case ClipMode::none: return "none";
        case ClipMode::hard: return "hard";
        case ClipMode::soft: return "soft";
    }
    return "?";
}
inline ClipMode clip_mode_from_name(const std::string& s) {
    if (s == "none") return ClipMode::none;
    if (s == "hard") return ClipMode::hard;
    if (s == "soft") return ClipMode::soft;
    throw ParameterError("unknown clip mode: " + s);
}

/// Inference-time truncation policy. Hard clipping is applied to emitted
/// snapshots during rollout; soft truncation exists only as a model output
/// stage (it is never applied after the fact to reported predictions).
struct ClipSpec {
    ClipMode mode = ClipMode::none;
    double C = 1.0;
    bool per_sample = true; // B = C * sup|u0| per sample, else global_B
    double global_B = 0.0;

    void validate() const {
        if (!(C >= 0.0)) throw ParameterError("clip: C must be >= 0");
        if (!per_sample && !(global_B >= 0.0))
            throw ParameterError("clip: global_B must be >= 0");
    }
};

/// Elementwise truncation to [-B, B]. NaNs pass through (blow-up detection
/// happens downstream) and B = +inf leaves values bitwise untouched.
inline double clip_value(double u, double B) {
    if (u < -B) return -B;
    if (u > B) return B;
    return u;
}

inline Tensor clip_prediction(Tensor u, double B) {
    if (!(B >= 0.0)) throw ParameterError("clip_prediction: B must be >= 0");
    for (auto& x : u.v) x = clip_value(x, B);
    return u;
}

} // namespace waveop::eval
