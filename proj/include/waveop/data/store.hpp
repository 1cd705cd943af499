#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveop/core/hash.hpp"
#include "waveop/core/tensor.hpp"
#include "waveop/grf/gaussian_random_field.hpp"
#include "waveop/pde/trajectory.hpp"

namespace waveop::data {

using nlohmann::json;

/// Everything needed to regenerate and audit a dataset. Serialized as
/// meta.json next to the raw array files.
struct StoreMeta {
    pde::Equation equation = pde::Equation::kdv;
    std::size_t n_samples = 0;
    std::size_t n_snapshots = 0;
    double T = 0.0;
    std::uint64_t base_seed = 0;
    json grf;            // sampling spec of the initial conditions
    json solver;         // solver configuration block
    json space;          // space descriptor (type + sizes)
    std::string float_precision = "f32";
    std::string eigenvalue_convention =
        "periodic: (2 pi k)^2 on [0,1); neumann: pi^2 (k1^2+k2^2) on [0,1]^2; "
        "constant mode excluded";
    json checksums; // filename -> fnv1a64 hex
};

/// In-memory dataset: trajectory snapshots [N, n_t, dof] plus the shared
/// space/time axes.
struct TrajectoryStore {
    StoreMeta meta;
    Tensor u; // [N, n_t, dof]
    std::vector<double> times;
    pde::SpaceDesc space;

    std::size_t n_samples() const { return meta.n_samples; }
    std::size_t n_snapshots() const { return meta.n_snapshots; }
    std::size_t dof() const { return u.shape[2]; }
    const double* snapshot(std::size_t sample, std::size_t t) const {
        return u.v.data() + (sample * n_snapshots() + t) * dof();
    }
    double sample_sup_norm(std::size_t sample) const {
        const double* p = snapshot(sample, 0);
        double m = 0.0;
        for (std::size_t i = 0; i < n_snapshots() * dof(); ++i)
            m = std::max(m, std::abs(p[i]));
        return m;
    }
};

namespace detail {

inline void write_bytes(const std::filesystem::path& p, const void* data, std::size_t len) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for write: " + p.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw Error("short write: " + p.string());
}

inline std::vector<char> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary | std::ios::ate);
    if (!in) throw CorruptionError("missing dataset file: " + p.string());
    const auto len = in.tellg();
    in.seekg(0);
    std::vector<char> buf(static_cast<std::size_t>(len));
    in.read(buf.data(), len);
    if (!in) throw CorruptionError("short read: " + p.string());
    return buf;
}

inline json space_to_json(const pde::SpaceDesc& s) {
    json j;
    if (const auto* g1 = std::get_if<pde::GridSpec1D>(&s)) {
        j["type"] = "grid1d";
        j["n"] = g1->n;
    } else if (const auto* g2 = std::get_if<pde::GridSpec2D>(&s)) {
        j["type"] = "grid2d";
        j["nx"] = g2->nx;
        j["ny"] = g2->ny;
    } else if (const auto* pc = std::get_if<pde::PointCloud>(&s)) {
        j["type"] = "cloud";
        j["n_nodes"] = pc->coords.size();
        j["target_spacing"] = pc->target_spacing;
    }
    return j;
}

} // namespace detail

inline json grf_spec_to_json(const grf::GrfSpec& s) {
    return json{{"sigma2", s.sigma2},   {"tau", s.tau},
                {"gamma", s.gamma},     {"boundary", grf::boundary_name(s.boundary)},
                {"resolution", s.resolution}, {"seed", s.seed}};
}

inline grf::GrfSpec grf_spec_from_json(const json& j) {
    grf::GrfSpec s;
    s.sigma2 = j.at("sigma2").get<double>();
    s.tau = j.at("tau").get<double>();
    s.gamma = j.at("gamma").get<double>();
    s.boundary = j.at("boundary").get<std::string>() == "periodic1d"
                     ? grf::Boundary::periodic1d
                     : grf::Boundary::neumann2d;
    s.resolution = j.at("resolution").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

/// Persist a batch of consistent trajectories. Layout: meta.json plus raw
/// little-endian arrays u.f32 [N, n_t, dof], t.f64 [n_t], coords.f64 and an
/// optional boundary_mask.u8 for point clouds.
inline TrajectoryStore write_store(const std::vector<pde::Trajectory>& trajectories,
                                   StoreMeta meta, const std::string& root) {
    if (trajectories.empty()) throw ParameterError("write_store: no trajectories");
    const std::size_t n_t = trajectories.front().n_snapshots();
    const std::size_t dof = trajectories.front().dof();
    for (const auto& tr : trajectories)
        if (tr.n_snapshots() != n_t || tr.dof() != dof)
            throw ShapeError("write_store: inconsistent trajectory shapes");

    namespace fs = std::filesystem;
    const fs::path dir(root);
    fs::create_directories(dir);

    meta.n_samples = trajectories.size();
    meta.n_snapshots = n_t;
    meta.space = detail::space_to_json(trajectories.front().space);

    try {
        // u.f32
        {
            std::vector<float> buf(trajectories.size() * n_t * dof);
            std::size_t off = 0;
            for (const auto& tr : trajectories)
                for (double x : tr.u.v) buf[off++] = static_cast<float>(x);
            detail::write_bytes(dir / "u.f32", buf.data(), buf.size() * sizeof(float));
        }
        detail::write_bytes(dir / "t.f64", trajectories.front().times.data(),
                            n_t * sizeof(double));
        // coordinates
        {
            std::vector<double> coords;
            const auto& sp = trajectories.front().space;
            if (const auto* g1 = std::get_if<pde::GridSpec1D>(&sp)) {
                for (std::size_t i = 0; i < g1->n; ++i) coords.push_back(g1->x(i));
            } else if (const auto* g2 = std::get_if<pde::GridSpec2D>(&sp)) {
                for (std::size_t j = 0; j < g2->ny; ++j)
                    for (std::size_t i = 0; i < g2->nx; ++i) {
                        coords.push_back(g2->x(i));
                        coords.push_back(g2->y(j));
                    }
            } else if (const auto* pc = std::get_if<pde::PointCloud>(&sp)) {
                for (const auto& c : pc->coords) {
                    coords.push_back(c[0]);
                    coords.push_back(c[1]);
                }
                detail::write_bytes(dir / "boundary_mask.u8", pc->boundary_mask.data(),
                                    pc->boundary_mask.size());
            }
            detail::write_bytes(dir / "coords.f64", coords.data(),
                                coords.size() * sizeof(double));
        }

        meta.checksums = json::object();
        for (const char* f : {"u.f32", "t.f64", "coords.f64", "boundary_mask.u8"})
            if (fs::exists(dir / f)) meta.checksums[f] = file_checksum((dir / f).string());

        json mj;
        mj["equation"] = pde::equation_name(meta.equation);
        mj["n_samples"] = meta.n_samples;
        mj["n_snapshots"] = meta.n_snapshots;
        mj["T"] = meta.T;
        mj["base_seed"] = meta.base_seed;
        mj["grf"] = meta.grf;
        mj["solver"] = meta.solver;
        mj["space"] = meta.space;
        mj["float_precision"] = meta.float_precision;
        mj["eigenvalue_convention"] = meta.eigenvalue_convention;
        mj["u_shape"] = {meta.n_samples, n_t, dof};
        mj["checksums"] = meta.checksums;
        std::ofstream out(dir / "meta.json");
        out << mj.dump(2) << "\n";
    } catch (...) {
        // leave no partial dataset behind
        for (const char* f : {"meta.json", "u.f32", "t.f64", "coords.f64", "boundary_mask.u8"})
            fs::remove(dir / f);
        throw;
    }

    return TrajectoryStore{meta,
                           [&] {
                               Tensor u({trajectories.size(), n_t, dof});
                               std::size_t off = 0;
                               for (const auto& tr : trajectories)
                                   for (double x : tr.u.v)
                                       u.v[off++] = static_cast<double>(static_cast<float>(x));
                               return u;
                           }(),
                           trajectories.front().times, trajectories.front().space};
}

/// Load a dataset directory, verifying checksums and shapes.
inline TrajectoryStore read_store(const std::string& root) {
    namespace fs = std::filesystem;
    const fs::path dir(root);
    std::ifstream metain(dir / "meta.json");
    if (!metain) throw CorruptionError("missing meta.json in " + root);
    json mj = json::parse(metain);

    TrajectoryStore store;
    store.meta.equation = pde::equation_from_name(mj.at("equation").get<std::string>());
    store.meta.n_samples = mj.at("n_samples").get<std::size_t>();
    store.meta.n_snapshots = mj.at("n_snapshots").get<std::size_t>();
    store.meta.T = mj.at("T").get<double>();
    store.meta.base_seed = mj.at("base_seed").get<std::uint64_t>();
    store.meta.grf = mj.value("grf", json::object());
    store.meta.solver = mj.value("solver", json::object());
    store.meta.space = mj.at("space");
    store.meta.float_precision = mj.value("float_precision", "f32");
    store.meta.eigenvalue_convention = mj.value("eigenvalue_convention", "");
    store.meta.checksums = mj.at("checksums");

    for (auto it = store.meta.checksums.begin(); it != store.meta.checksums.end(); ++it) {
        const auto path = (dir / it.key()).string();
        if (file_checksum(path) != it.value().get<std::string>())
            throw CorruptionError("checksum mismatch for " + path);
    }

    const auto shape = mj.at("u_shape").get<std::vector<std::size_t>>();
    const std::size_t expect = shape[0] * shape[1] * shape[2];
    auto ubytes = detail::read_bytes(dir / "u.f32");
    if (ubytes.size() != expect * sizeof(float))
        throw CorruptionError("u.f32 size does not match recorded shape");
    store.u = Tensor({shape[0], shape[1], shape[2]});
    const auto* fp = reinterpret_cast<const float*>(ubytes.data());
    for (std::size_t i = 0; i < expect; ++i) store.u.v[i] = fp[i];

    auto tbytes = detail::read_bytes(dir / "t.f64");
    if (tbytes.size() != shape[1] * sizeof(double))
        throw CorruptionError("t.f64 size does not match snapshot count");
    store.times.resize(shape[1]);
    std::memcpy(store.times.data(), tbytes.data(), tbytes.size());

    const std::string stype = store.meta.space.at("type").get<std::string>();
    if (stype == "grid1d") {
        store.space = pde::GridSpec1D{store.meta.space.at("n").get<std::size_t>()};
    } else if (stype == "grid2d") {
        store.space = pde::GridSpec2D{store.meta.space.at("nx").get<std::size_t>(),
                                      store.meta.space.at("ny").get<std::size_t>()};
    } else {
        pde::PointCloud pc;
        pc.target_spacing = store.meta.space.at("target_spacing").get<double>();
        auto cbytes = detail::read_bytes(dir / "coords.f64");
        const std::size_t n_nodes = cbytes.size() / (2 * sizeof(double));
        const auto* cp = reinterpret_cast<const double*>(cbytes.data());
        pc.coords.resize(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) pc.coords[i] = {cp[2 * i], cp[2 * i + 1]};
        auto mbytes = detail::read_bytes(dir / "boundary_mask.u8");
        if (mbytes.size() != n_nodes)
            throw CorruptionError("boundary_mask.u8 size does not match node count");
        pc.boundary_mask.assign(mbytes.begin(), mbytes.end());
        store.space = std::move(pc);
    }

    if (store.meta.n_samples != shape[0])
        throw CorruptionError("meta n_samples disagrees with u_shape");
    return store;
}

} // namespace waveop::data
