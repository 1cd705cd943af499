#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "waveop/core/rng.hpp"
#include "waveop/data/store.hpp"

namespace waveop::data {

enum class SamplingMode { fixed_start, global_random, local_random };

inline std::string sampling_mode_name(SamplingMode m) {
    switch (m) {
        case SamplingMode::fixed_start: return "fixed_start";
        case SamplingMode::global_random: return "global_random";
        case SamplingMode::local_random: return "local_random";
    }
    return "?";
}

inline SamplingMode sampling_mode_from_name(const std::string& s) {
    if (s == "fixed_start") return SamplingMode::fixed_start;
    if (s == "global_random") return SamplingMode::global_random;
    if (s == "local_random") return SamplingMode::local_random;
    throw ParameterError("unknown sampling mode: " + s);
}

/// How one (input, target) fragment is cut from each trajectory.
struct SamplingPolicy {
    SamplingMode mode = SamplingMode::fixed_start;
    std::size_t window_l = 10;
    double t_lo = 0.0, t_hi = 0.0; // only read in local_random mode
    std::uint64_t seed = 0;
};

/// Two consecutive non-overlapping windows of window_l snapshots each.
struct WindowPair {
    Tensor input;  // [l, dof]
    Tensor target; // [l, dof]
    double start_time = 0.0;
    std::size_t trajectory = 0;
    std::size_t start_index = 0;
};

namespace detail {

inline Tensor copy_window(const TrajectoryStore& store, std::size_t sample,
                          std::size_t start, std::size_t l) {
    const std::size_t dof = store.dof();
    Tensor w({l, dof});
    for (std::size_t s = 0; s < l; ++s) {
        const double* src = store.snapshot(sample, start + s);
        std::copy(src, src + dof, w.v.data() + s * dof);
    }
    return w;
}

} // namespace detail

/// Feasible start indices for the policy on a given time axis. A start i is
/// feasible when both windows fit: i + 2l <= n_t.
inline std::vector<std::size_t> feasible_starts(const SamplingPolicy& policy,
                                                const std::vector<double>& times) {
    const std::size_t n_t = times.size();
    if (n_t < 2 * policy.window_l)
        throw ParameterError("sampling: trajectory shorter than two windows");
    const std::size_t i_max = n_t - 2 * policy.window_l;
    std::vector<std::size_t> idx;
    switch (policy.mode) {
        case SamplingMode::fixed_start: idx.push_back(0); break;
        case SamplingMode::global_random:
            for (std::size_t i = 0; i <= i_max; ++i) idx.push_back(i);
            break;
        case SamplingMode::local_random:
            for (std::size_t i = 0; i <= i_max; ++i)
                if (times[i] >= policy.t_lo - 1e-12 && times[i] <= policy.t_hi + 1e-12)
                    idx.push_back(i);
            if (idx.empty())
                throw ParameterError("sampling: local_random range contains no feasible start");
            break;
    }
    return idx;
}

/// Cut exactly one window pair per listed trajectory under the policy;
/// deterministic for a given policy seed.
inline std::vector<WindowPair> make_window_pairs(const TrajectoryStore& store,
                                                 const SamplingPolicy& policy,
                                                 const std::vector<std::size_t>& samples) {
    if (policy.window_l < 1) throw ParameterError("sampling: window_l must be >= 1");
    const auto starts = feasible_starts(policy, store.times);
    std::vector<WindowPair> pairs;
    pairs.reserve(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const std::size_t sample = samples[k];
        std::size_t start = starts.front();
        if (starts.size() > 1) {
            // one independent draw per trajectory, keyed by trajectory index
            GaussianStream g(derive_seed(policy.seed, "sampling.start", sample));
            start = starts[g.uniform_index(starts.size())];
        }
        WindowPair p;
        p.input = detail::copy_window(store, sample, start, policy.window_l);
        p.target = detail::copy_window(store, sample, start + policy.window_l, policy.window_l);
        p.start_time = store.times[start];
        p.trajectory = sample;
        p.start_index = start;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

/// Convenience overload over every trajectory in the store.
inline std::vector<WindowPair> make_window_pairs(const TrajectoryStore& store,
                                                 const SamplingPolicy& policy) {
    std::vector<std::size_t> all(store.n_samples());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return make_window_pairs(store, policy, all);
}

struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};

/// Deterministic data split: the test block is always the last `test`
/// trajectories in generation order so that experiments with different
/// sampling policies score against identical test data; train/val shuffle the
/// remainder with the given seed.
inline SplitIndices split_dataset(const TrajectoryStore& store, std::size_t n_train,
                                  std::size_t n_val, std::size_t n_test,
                                  std::uint64_t seed) {
    const std::size_t n = store.n_samples();
    if (n_train + n_val + n_test > n)
        throw ParameterError("split_dataset: requested sizes exceed dataset size");
    SplitIndices out;
    for (std::size_t i = n - n_test; i < n; ++i) out.test.push_back(i);

    std::vector<std::size_t> rest(n - n_test);
    std::iota(rest.begin(), rest.end(), std::size_t{0});
    GaussianStream g(derive_seed(seed, "split.shuffle"));
    for (std::size_t i = rest.size(); i > 1; --i)
        std::swap(rest[i - 1], rest[g.uniform_index(i)]);
    out.train.assign(rest.begin(), rest.begin() + static_cast<long>(n_train));
    out.val.assign(rest.begin() + static_cast<long>(n_train),
                   rest.begin() + static_cast<long>(n_train + n_val));
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    return out;
}

} // namespace waveop::data
