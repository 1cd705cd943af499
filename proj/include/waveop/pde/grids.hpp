#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "waveop/core/error.hpp"

namespace waveop::pde {

/// Uniform periodic grid on [0,1): nodes x_i = i/n, endpoint identified.
struct GridSpec1D {
    std::size_t n = 0;

    double spacing() const { return 1.0 / static_cast<double>(n); }
    double x(std::size_t i) const { return static_cast<double>(i) * spacing(); }
    std::size_t dof() const { return n; }
};

/// Uniform tensor grid on [0,1]^2 including boundary nodes.
struct GridSpec2D {
    std::size_t nx = 0, ny = 0;

    double hx() const { return 1.0 / static_cast<double>(nx - 1); }
    double hy() const { return 1.0 / static_cast<double>(ny - 1); }
    double x(std::size_t i) const { return static_cast<double>(i) * hx(); }
    double y(std::size_t j) const { return static_cast<double>(j) * hy(); }
    std::size_t dof() const { return nx * ny; }
    // Row-major: index = j*nx + i.
    std::size_t at(std::size_t i, std::size_t j) const { return j * nx + i; }
};

/// Scattered nodes on an irregular 2D domain.
struct PointCloud {
    std::vector<std::array<double, 2>> coords;
    std::vector<std::uint8_t> boundary_mask;
    double target_spacing = 0.0;

    std::size_t dof() const { return coords.size(); }
    std::size_t n_boundary() const {
        std::size_t c = 0;
        for (auto b : boundary_mask) c += (b != 0);
        return c;
    }
};

using SpaceDesc = std::variant<GridSpec1D, GridSpec2D, PointCloud>;

inline std::size_t space_dof(const SpaceDesc& s) {
    return std::visit([](const auto& g) { return g.dof(); }, s);
}

} // namespace waveop::pde
