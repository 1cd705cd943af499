#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace waveop {

/// splitmix64 step: the backbone of all randomness in this library.
/// Chosen over std:: engines so that streams are cheap to fork, fully
/// reproducible across compilers, and addressable by counter.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t s = x;
    return splitmix64(s);
}

/// FNV-1a over a string, used to fan a single top-level seed out to named
/// components ("generate.sample", "train.init", ...).
inline std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Deterministic seed derivation: base seed + component name + index.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view name,
                                 std::uint64_t index = 0) {
    return mix64(mix64(base) ^ hash_name(name) ^ mix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

/// Stateful Gaussian stream (Box-Muller over splitmix64 uniforms).
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : state_(mix64(seed ^ 0xd1b54a32d192ed03ULL)) {}

    double uniform() {
        // 53-bit mantissa, strictly inside (0, 1).
        return (static_cast<double>(splitmix64(state_) >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform integer in [0, n).  Rejection-free modulo is fine here: n is
    /// always tiny compared to 2^64 so the bias is ~n/2^64.
    std::uint64_t uniform_index(std::uint64_t n) { return splitmix64(state_) % n; }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Counter-based Gaussian pair: a pure function of the key. Used where a
/// value must be attached to an identity (e.g. a spectral mode) rather than
/// to a draw position, so that truncation sets can change without reshuffling
/// coefficients.
inline void gaussian_pair_at(std::uint64_t key, double& z0, double& z1) {
    std::uint64_t s = mix64(key ^ 0x8e2f9d4b1c3a5e7fULL);
    const double u1 = (static_cast<double>(splitmix64(s) >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(splitmix64(s) >> 11) + 0.5) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
}

inline std::uint64_t key3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a) ^ (mix64(b) * 0x9e3779b97f4a7c15ULL) ^
                 (mix64(c) * 0xc2b2ae3d27d4eb4fULL));
}

} // namespace waveop
