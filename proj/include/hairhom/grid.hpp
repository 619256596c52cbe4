#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "hairhom/errors.hpp"

namespace hairhom {

/// 1D macroscopic grid on [0, M] with a node placed exactly at the hair-zone
/// interface x3 = L. Vertex-centered: unknowns live on nodes, control volumes
/// are the dual boxes clipped to [0, M].
struct Grid1D {
    std::vector<double> nodes;    // strictly increasing, nodes.front()==0, nodes.back()==M
    std::size_t interface_index;  // nodes[interface_index] == L
    std::vector<double> spacing;  // spacing[i] = nodes[i+1]-nodes[i]

    std::size_t size() const { return nodes.size(); }
    double length() const { return nodes.back(); }
    double interface() const { return nodes[interface_index]; }

    double cv_lo(std::size_t i) const {
        return i == 0 ? nodes.front() : 0.5 * (nodes[i - 1] + nodes[i]);
    }
    double cv_hi(std::size_t i) const {
        return i + 1 == nodes.size() ? nodes.back() : 0.5 * (nodes[i] + nodes[i + 1]);
    }
    double cv_measure(std::size_t i) const { return cv_hi(i) - cv_lo(i); }

    void check() const {
        std::vector<std::string> bad;
        if (nodes.size() < 2) bad.push_back("grid needs at least 2 nodes");
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            if (!(nodes[i] < nodes[i + 1])) {
                bad.push_back("grid nodes not strictly increasing");
                break;
            }
        if (!nodes.empty() && nodes.front() != 0.0) bad.push_back("first node must be 0");
        if (interface_index >= nodes.size()) bad.push_back("interface index out of range");
        if (!bad.empty()) throw ValidationError(bad);
    }
};

/// Build the [0, M] grid from n_cells total cells, splitting them between
/// [0, L] and [L, M] in proportion so a node lands exactly on L.
inline Grid1D make_macro_grid(double L, double M, std::size_t n_cells) {
    if (!(0.0 < L && L < M)) throw ValidationError("macro grid requires 0 < L < M");
    if (n_cells < 4) throw ValidationError("macro grid requires at least 4 cells");
    auto n_lo = static_cast<std::size_t>(std::lround(double(n_cells) * L / M));
    n_lo = std::clamp<std::size_t>(n_lo, 2, n_cells - 2);
    const std::size_t n_hi = n_cells - n_lo;

    Grid1D g;
    g.nodes.reserve(n_cells + 1);
    for (std::size_t i = 0; i < n_lo; ++i)
        g.nodes.push_back(L * double(i) / double(n_lo));
    g.nodes.push_back(L);
    for (std::size_t i = 1; i < n_hi; ++i)
        g.nodes.push_back(L + (M - L) * double(i) / double(n_hi));
    g.nodes.push_back(M);
    g.interface_index = n_lo;
    g.spacing.resize(g.nodes.size() - 1);
    for (std::size_t i = 0; i + 1 < g.nodes.size(); ++i)
        g.spacing[i] = g.nodes[i + 1] - g.nodes[i];
    g.check();
    return g;
}

/// Grid on [0, L] formed by the hair-zone prefix of a macro grid, so that u1
/// and U2 share node locations with u0 below the interface.
inline Grid1D hair_zone_subgrid(const Grid1D& macro) {
    Grid1D g;
    g.nodes.assign(macro.nodes.begin(), macro.nodes.begin() + long(macro.interface_index) + 1);
    g.interface_index = macro.interface_index;
    g.spacing.assign(macro.spacing.begin(), macro.spacing.begin() + long(macro.interface_index));
    return g;
}

/// Discrete solution values bound to a 1D grid, stamped with simulation time.
struct Field {
    std::shared_ptr<const Grid1D> grid;
    std::vector<double> values;
    double time = 0.0;

    std::size_t size() const { return values.size(); }
};

inline Field make_field(std::shared_ptr<const Grid1D> grid, double fill = 0.0, double t = 0.0) {
    Field f;
    f.values.assign(grid->size(), fill);
    f.grid = std::move(grid);
    f.time = t;
    return f;
}

/// Piecewise-linear evaluation; clamps to the grid end values outside.
inline double interpolate(const Field& f, double x) {
    const auto& xs = f.grid->nodes;
    if (x <= xs.front()) return f.values.front();
    if (x >= xs.back()) return f.values.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = std::size_t(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - t) * f.values[i] + t * f.values[i + 1];
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace hairhom
