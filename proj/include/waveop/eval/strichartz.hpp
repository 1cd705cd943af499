#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "waveop/data/store.hpp"

namespace waveop::eval {

/// Per-sample ratio max_{t in range} sup|u(t,.)| / sup|u0| over a dataset,
/// with order statistics and a histogram for choosing an empirical bound
/// multiplier. Samples with vanishing initial data are skipped and counted.
struct StrichartzSummary {
    std::vector<double> ratios; // one per admissible sample
    std::size_t skipped = 0;
    double median = 0.0;
    double q10 = 0.0, q90 = 0.0, max = 0.0;
    std::vector<double> hist_edges;
    std::vector<std::size_t> hist_counts;
};

inline StrichartzSummary estimate_strichartz_constant(const data::TrajectoryStore& store,
                                                      double t_lo, double t_hi,
                                                      std::size_t hist_bins = 40) {
    StrichartzSummary out;
    const std::size_t dof = store.dof();
    for (std::size_t i = 0; i < store.n_samples(); ++i) {
        double sup0 = 0.0;
        const double* u0 = store.snapshot(i, 0);
        for (std::size_t j = 0; j < dof; ++j) sup0 = std::max(sup0, std::abs(u0[j]));
        if (sup0 == 0.0) {
            ++out.skipped;
            continue;
        }
        double peak = 0.0;
        for (std::size_t t = 0; t < store.n_snapshots(); ++t) {
            if (store.times[t] < t_lo - 1e-9 || store.times[t] > t_hi + 1e-9) continue;
            const double* u = store.snapshot(i, t);
            for (std::size_t j = 0; j < dof; ++j) peak = std::max(peak, std::abs(u[j]));
        }
        out.ratios.push_back(peak / sup0);
    }
    if (out.ratios.empty()) return out;

    std::vector<double> sorted = out.ratios;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * double(sorted.size() - 1);
        const std::size_t lo = std::size_t(pos);
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - double(lo)) * (sorted[hi] - sorted[lo]);
    };
    out.median = quantile(0.5);
    out.q10 = quantile(0.1);
    out.q90 = quantile(0.9);
    out.max = sorted.back();

    const double hi_edge = std::max(1.0, out.max) * (1.0 + 1e-12);
    out.hist_edges.resize(hist_bins + 1);
    out.hist_counts.assign(hist_bins, 0);
    for (std::size_t b = 0; b <= hist_bins; ++b)
        out.hist_edges[b] = hi_edge * double(b) / double(hist_bins);
    for (double r : out.ratios) {
        auto b = std::min<std::size_t>(hist_bins - 1,
                                       std::size_t(r / hi_edge * double(hist_bins)));
        ++out.hist_counts[b];
    }
    return out;
}

} // namespace waveop::eval
