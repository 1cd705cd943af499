#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveop/core/tensor.hpp"
#include "waveop/eval/clipping.hpp"

namespace waveop::eval {

using nlohmann::json;

/// Per-snapshot relative L2 error of a predicted trajectory against the
/// truth. Snapshots with zero-norm truth, or with non-finite predictions
/// (post blow-up), are marked NaN and excluded from aggregation.
inline std::vector<double> accumulation_error(const Tensor& pred, const Tensor& truth) {
    require_same_shape(pred, truth, "accumulation_error");
    if (pred.rank() != 2) throw ShapeError("accumulation_error: expected [n_t, dof]");
    const std::size_t nt = pred.shape[0], dof = pred.shape[1];
    std::vector<double> err(nt, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < nt; ++t) {
        double num = 0.0, den = 0.0;
        bool finite = true;
        for (std::size_t j = 0; j < dof; ++j) {
            const double p = pred.v[t * dof + j], q = truth.v[t * dof + j];
            if (!std::isfinite(p)) {
                finite = false;
                break;
            }
            num += (p - q) * (p - q);
            den += q * q;
        }
        if (finite && den > 0.0) err[t] = std::sqrt(num / den);
    }
    return err;
}

struct ErrorRange {
    std::string name;
    double t_lo = 0.0, t_hi = 0.0;
};

/// Aggregated error curve of one evaluation variant across the test set.
struct VariantReport {
    std::string name;
    std::vector<double> mean_error;        // per snapshot; NaN when nothing alive
    std::vector<std::size_t> alive_count;  // contributing samples per snapshot
    std::vector<double> range_means;       // aligned with the report's ranges
    std::vector<bool> range_has_blowup;    // a sample died within the range
    std::size_t n_samples = 0;
    std::size_t n_blowups = 0;
};

struct RolloutReport {
    std::vector<double> times;
    std::vector<ErrorRange> ranges;
    std::vector<VariantReport> variants;
    json clip_settings = json::object();
    json provenance = json::object();
};

inline std::vector<std::size_t> snapshots_in_range(const std::vector<double>& times,
                                                   const ErrorRange& r) {
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < times.size(); ++t)
        if (times[t] >= r.t_lo - 1e-9 && times[t] <= r.t_hi + 1e-9) idx.push_back(t);
    return idx;
}

/// Collapse per-sample error curves (rows may hold NaN markers) into the
/// report form: snapshot means over alive samples, then range means over the
/// snapshot means.
inline VariantReport summarize_errors(const std::vector<std::vector<double>>& sample_errors,
                                      const std::vector<double>& times,
                                      const std::vector<ErrorRange>& ranges,
                                      std::string name) {
    VariantReport rep;
    rep.name = std::move(name);
    rep.n_samples = sample_errors.size();
    const std::size_t nt = times.size();
    rep.mean_error.assign(nt, std::numeric_limits<double>::quiet_NaN());
    rep.alive_count.assign(nt, 0);
    for (std::size_t t = 0; t < nt; ++t) {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& row : sample_errors) {
            if (t < row.size() && std::isfinite(row[t])) {
                s += row[t];
                ++n;
            }
        }
        rep.alive_count[t] = n;
        if (n > 0) rep.mean_error[t] = s / double(n);
    }
    for (const auto& row : sample_errors) {
        bool blew = false;
        for (double e : row)
            if (std::isnan(e)) blew = true;
        rep.n_blowups += blew ? 1 : 0;
    }
    for (const auto& r : ranges) {
        const auto idx = snapshots_in_range(times, r);
        if (idx.empty())
            throw ParameterError("summarize_errors: range '" + r.name +
                                 "' holds no snapshots");
        double s = 0.0;
        std::size_t n = 0;
        bool blow = false;
        for (std::size_t t : idx) {
            if (std::isfinite(rep.mean_error[t])) {
                s += rep.mean_error[t];
                ++n;
            }
            if (rep.alive_count[t] < rep.n_samples) blow = true;
        }
        rep.range_means.push_back(n > 0 ? s / double(n)
                                        : std::numeric_limits<double>::quiet_NaN());
        rep.range_has_blowup.push_back(blow);
    }
    return rep;
}

inline json variant_to_json(const VariantReport& v) {
    json j;
    j["name"] = v.name;
    j["mean_error"] = json::array();
    for (double e : v.mean_error)
        j["mean_error"].push_back(std::isfinite(e) ? json(e) : json());
    j["alive_count"] = v.alive_count;
    j["range_means"] = json::array();
    for (double e : v.range_means)
        j["range_means"].push_back(std::isfinite(e) ? json(e) : json());
    j["range_has_blowup"] = v.range_has_blowup;
    j["n_samples"] = v.n_samples;
    j["n_blowups"] = v.n_blowups;
    return j;
}

inline void write_report(const RolloutReport& rep, const std::string& path) {
    json j;
    j["times"] = rep.times;
    j["ranges"] = json::array();
    for (const auto& r : rep.ranges)
        j["ranges"].push_back(json{{"name", r.name}, {"t_lo", r.t_lo}, {"t_hi", r.t_hi}});
    j["variants"] = json::array();
    for (const auto& v : rep.variants) j["variants"].push_back(variant_to_json(v));
    j["clip_settings"] = rep.clip_settings;
    j["provenance"] = rep.provenance;
    std::ofstream out(path);
    if (!out) throw Error("cannot write report: " + path);
    out << j.dump(2) << "\n";
}

inline RolloutReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open report: " + path);
    json j = json::parse(in);
    RolloutReport rep;
    rep.times = j.at("times").get<std::vector<double>>();
    for (const auto& rj : j.at("ranges"))
        rep.ranges.push_back(ErrorRange{rj.at("name").get<std::string>(),
                                        rj.at("t_lo").get<double>(),
                                        rj.at("t_hi").get<double>()});
    for (const auto& vj : j.at("variants")) {
        VariantReport v;
        v.name = vj.at("name").get<std::string>();
        for (const auto& e : vj.at("mean_error"))
            v.mean_error.push_back(e.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                               : e.get<double>());
        v.alive_count = vj.at("alive_count").get<std::vector<std::size_t>>();
        for (const auto& e : vj.at("range_means"))
            v.range_means.push_back(e.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                : e.get<double>());
        v.range_has_blowup = vj.at("range_has_blowup").get<std::vector<bool>>();
        v.n_samples = vj.at("n_samples").get<std::size_t>();
        v.n_blowups = vj.at("n_blowups").get<std::size_t>();
        rep.variants.push_back(std::move(v));
    }
    rep.clip_settings = j.value("clip_settings", json::object());
    rep.provenance = j.value("provenance", json::object());
    return rep;
}

/// Plotting payload: one (time, mean_error, variant) row per finite entry.
inline void write_error_csv(const RolloutReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write csv: " + path);
    out << "time,mean_error,variant\n";
    for (const auto& v : rep.variants)
        for (std::size_t t = 0; t < rep.times.size(); ++t)
            if (std::isfinite(v.mean_error[t]))
                out << rep.times[t] << "," << v.mean_error[t] << "," << v.name << "\n";
}

} // namespace waveop::eval
