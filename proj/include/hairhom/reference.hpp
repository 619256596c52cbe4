#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "hairhom/banded.hpp"
#include "hairhom/correctors.hpp"
#include "hairhom/errors.hpp"
#include "hairhom/macro.hpp"
#include "hairhom/scenario.hpp"
#include "hairhom/time_stepping.hpp"

namespace hairhom {

/// Tensor-product grid for the equal-area axisymmetric reduction of one
/// periodicity cell: outer radius rho_cell = eps/sqrt(pi), hair of radius
/// r_eps and height L resolved as a hole, radial nodes graded geometrically
/// toward the hair surface where the solution varies like ln r.
struct AxiGrid {
    std::vector<double> r_nodes, z_nodes;
    std::size_t hair_radial_index = 0;  // r_nodes[hair_radial_index] == r_eps
    std::size_t interface_z_index = 0;  // z_nodes[interface_z_index] == hair_height
    double r_eps = 0.0, rho_cell = 0.0, hair_height = 0.0;
    double grading = 1.0;
    bool annulus_mode = false;
    double outer_value = 1.0;           // outer-radius Dirichlet value in annulus mode
    std::vector<std::uint8_t> hole_mask;  // per node, 1 = inside the hair

    std::size_t nr() const { return r_nodes.size(); }
    std::size_t nz() const { return z_nodes.size(); }
    std::size_t node_index(std::size_t i, std::size_t j) const { return j * nr() + i; }
    bool active(std::size_t i, std::size_t j) const { return hole_mask[node_index(i, j)] == 0; }
    std::size_t active_count() const {
        std::size_t c = 0;
        for (auto m : hole_mask) c += (m == 0);
        return c;
    }

    double rcv_lo(std::size_t i) const {
        return i == 0 ? r_nodes.front() : 0.5 * (r_nodes[i - 1] + r_nodes[i]);
    }
    double rcv_hi(std::size_t i) const {
        return i + 1 == nr() ? r_nodes.back() : 0.5 * (r_nodes[i] + r_nodes[i + 1]);
    }
    double zcv_lo(std::size_t j) const {
        return j == 0 ? z_nodes.front() : 0.5 * (z_nodes[j - 1] + z_nodes[j]);
    }
    double zcv_hi(std::size_t j) const {
        return j + 1 == nz() ? z_nodes.back() : 0.5 * (z_nodes[j] + z_nodes[j + 1]);
    }
};

namespace detail {

/// Section of a 1D axis with n cells and spacings graded geometrically so the
/// finest cell (ratio `contrast` below the coarsest) sits at the `toward_end`
/// side. contrast -> 1 recovers a uniform split.
inline std::vector<double> graded_section(double lo, double hi, std::size_t n, double contrast,
                                          bool fine_at_hi) {
    std::vector<double> w(n);
    const double q = n > 1 ? std::pow(contrast, 1.0 / double(n - 1)) : 1.0;
    for (std::size_t j = 0; j < n; ++j)
        w[j] = std::pow(q, fine_at_hi ? double(n - 1 - j) : double(j));
    double sum = 0.0;
    for (double x : w) sum += x;
    std::vector<double> nodes(n + 1);
    nodes[0] = lo;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += w[j];
        nodes[j + 1] = lo + (hi - lo) * acc / sum;
    }
    nodes[n] = hi;
    return nodes;
}

} // namespace detail

/// Build the grid for a full-reference scenario. n_r and n_z count total
/// cells; a node lands exactly on r_eps and on z = L. grading in (0, 1]
/// blends uniform (0) with pure geometric (1) radial spacing in the annulus.
inline AxiGrid build_axi_grid(const Scenario& s, std::size_t n_r, std::size_t n_z,
                              double grading = 1.0) {
    s.ensure_valid();
    if (s.regime != Regime::FullReference)
        throw ValidationError("build_axi_grid expects a full-reference scenario");
    if (n_r < 16 || n_z < 16) throw ValidationError("axi grid needs n_r, n_z >= 16");
    if (!(grading > 0.0 && grading <= 1.0)) throw ValidationError("grading must lie in (0, 1]");

    AxiGrid g;
    g.r_eps = s.r_eps();
    g.rho_cell = s.epsilon / std::sqrt(std::numbers::pi);
    g.hair_height = s.L;
    g.grading = grading;
    if (!(g.r_eps < g.rho_cell))
        throw GeometryError("hair radius exceeds the equal-area cell radius");

    // radial nodes: a small uniform cap inside the hair radius plus a graded
    // annulus section
    const std::size_t n_in = std::clamp<std::size_t>(n_r / 16, 2, n_r - 8);
    const std::size_t n_ann = n_r - n_in;
    g.r_nodes.reserve(n_r + 1);
    for (std::size_t i = 0; i < n_in; ++i)
        g.r_nodes.push_back(g.r_eps * double(i) / double(n_in));
    const double ratio = g.rho_cell / g.r_eps;
    for (std::size_t i = 0; i <= n_ann; ++i) {
        const double t = double(i) / double(n_ann);
        const double geometric = g.r_eps * std::pow(ratio, t);
        const double uniform = g.r_eps + (g.rho_cell - g.r_eps) * t;
        g.r_nodes.push_back(grading * geometric + (1.0 - grading) * uniform);
    }
    g.hair_radial_index = n_in;
    g.r_nodes[n_in] = g.r_eps;
    g.r_nodes.back() = g.rho_cell;

    // axial nodes: both sections mildly refined toward the hair tip plane
    const auto n_lo =
        std::clamp<std::size_t>(std::size_t(std::lround(double(n_z) * s.L / s.M)), 4, n_z - 4);
    auto below = detail::graded_section(0.0, s.L, n_lo, 4.0, true);
    auto above = detail::graded_section(s.L, s.M, n_z - n_lo, 4.0, false);
    g.z_nodes = std::move(below);
    g.z_nodes.insert(g.z_nodes.end(), above.begin() + 1, above.end());
    g.interface_z_index = n_lo;

    g.hole_mask.assign(g.nr() * g.nz(), 0);
    for (std::size_t j = 0; j < g.interface_z_index; ++j)
        for (std::size_t i = 0; i < g.hair_radial_index; ++i)
            g.hole_mask[g.node_index(i, j)] = 1;
    return g;
}

/// Grid for the z-independent annulus test mode: radial span [r_eps, eps*rho]
/// with outer Dirichlet data, hair spanning the full height.
inline AxiGrid build_annulus_grid(const CorrectorParams& p, std::size_t n_r,
                                  std::size_t n_z = 8, double outer_value = 1.0) {
    p.ensure_valid();
    AxiGrid g;
    g.r_eps = p.r_eps();
    g.rho_cell = p.outer_radius();
    g.hair_height = 1.0;  // spans everything; height is arbitrary
    g.annulus_mode = true;
    g.outer_value = outer_value;
    const double ratio = g.rho_cell / g.r_eps;
    g.r_nodes.resize(n_r + 1);
    for (std::size_t i = 0; i <= n_r; ++i)
        g.r_nodes[i] = g.r_eps * std::pow(ratio, double(i) / double(n_r));
    g.r_nodes.back() = g.rho_cell;
    g.hair_radial_index = 0;
    g.z_nodes.resize(n_z + 1);
    for (std::size_t j = 0; j <= n_z; ++j)
        g.z_nodes[j] = g.hair_height * double(j) / double(n_z);
    g.interface_z_index = n_z;
    g.hole_mask.assign(g.nr() * g.nz(), 0);
    return g;
}

/// Resolved solution on one periodicity cell.
struct ReferenceSolution {
    std::shared_ptr<const AxiGrid> grid;
    std::vector<double> values;  // NaN inside the hole mask
    double time = 0.0;
    bool steady = true;
    Scenario scenario;

    // transient monitors, one entry per step
    std::vector<double> times, surface_avg_history, mass_history, balance_residuals;

    double value(std::size_t i, std::size_t j) const { return values[grid->node_index(i, j)]; }
};

namespace detail {

struct AxiAssembly {
    SemiDiscreteSystem sys;
    double robin_K = 0.0;  // eps^2 kappa / r_eps
};

/// Conservative vertex-centered assembly. Faces and control volumes are
/// clipped against the hair: radial faces inside the cap exist only above
/// z = L, axial faces below z = L only outside r_eps.
template <class SurfaceCoef>
AxiAssembly assemble_axi(const Scenario& s, const AxiGrid& g, SurfaceCoef&& surface_coef) {
    const std::size_t nr = g.nr(), nz = g.nz(), n = nr * nz;
    const double L = g.annulus_mode ? std::numeric_limits<double>::infinity() : g.hair_height;
    AxiAssembly out;
    out.robin_K = s.epsilon * s.epsilon * s.kappa / g.r_eps;
    auto& sys = out.sys;
    sys.stiffness = BandedMatrix(n, nr);
    sys.load.assign(n, 0.0);
    sys.volumes.assign(n, 1.0);
    const double pi = std::numbers::pi;

    for (std::size_t j = 0; j < nz; ++j) {
        const double zlo = g.zcv_lo(j), zhi = g.zcv_hi(j);
        for (std::size_t i = 0; i < nr; ++i) {
            const std::size_t I = g.node_index(i, j);
            if (!g.active(i, j)) {
                sys.stiffness.set(I, I, 1.0);
                continue;
            }
            const double rlo = g.rcv_lo(i), rhi = g.rcv_hi(i);

            // control volume (fluid part)
            double vol = 0.0;
            {
                const double below = std::max(0.0, std::min(zhi, L) - zlo);
                const double above = std::max(0.0, zhi - std::max(zlo, L));
                const double rlo_clip = std::max(rlo, g.r_eps);
                if (rhi > rlo_clip) vol += below * pi * (rhi * rhi - rlo_clip * rlo_clip);
                vol += above * pi * (rhi * rhi - rlo * rlo);
            }
            sys.volumes[I] = vol;

            // radial fluxes
            if (i + 1 < nr && g.active(i + 1, j)) {
                const double rf = 0.5 * (g.r_nodes[i] + g.r_nodes[i + 1]);
                double lo = zlo;
                if (rf < g.r_eps) lo = std::max(lo, L);  // face inside the cap
                if (zhi > lo) {
                    const double c = s.D_u * 2.0 * pi * rf * (zhi - lo) /
                                     (g.r_nodes[i + 1] - g.r_nodes[i]);
                    sys.stiffness.add(I, I, c);
                    sys.stiffness.add(I, g.node_index(i + 1, j), -c);
                }
            }
            if (i > 0 && g.active(i - 1, j)) {
                const double rf = 0.5 * (g.r_nodes[i - 1] + g.r_nodes[i]);
                double lo = zlo;
                if (rf < g.r_eps) lo = std::max(lo, L);
                if (zhi > lo) {
                    const double c = s.D_u * 2.0 * pi * rf * (zhi - lo) /
                                     (g.r_nodes[i] - g.r_nodes[i - 1]);
                    sys.stiffness.add(I, I, c);
                    sys.stiffness.add(I, g.node_index(i - 1, j), -c);
                }
            }

            // axial fluxes
            if (j + 1 < nz && g.active(i, j + 1)) {
                const double zf = 0.5 * (g.z_nodes[j] + g.z_nodes[j + 1]);
                double lo = rlo;
                if (zf < L) lo = std::max(lo, g.r_eps);
                if (rhi > lo) {
                    const double c = s.D_u * pi * (rhi * rhi - lo * lo) /
                                     (g.z_nodes[j + 1] - g.z_nodes[j]);
                    sys.stiffness.add(I, I, c);
                    sys.stiffness.add(I, g.node_index(i, j + 1), -c);
                }
            }
            if (j > 0 && g.active(i, j - 1)) {
                const double zf = 0.5 * (g.z_nodes[j - 1] + g.z_nodes[j]);
                double lo = rlo;
                if (zf < L) lo = std::max(lo, g.r_eps);
                if (rhi > lo) {
                    const double c = s.D_u * pi * (rhi * rhi - lo * lo) /
                                     (g.z_nodes[j] - g.z_nodes[j - 1]);
                    sys.stiffness.add(I, I, c);
                    sys.stiffness.add(I, g.node_index(i, j - 1), -c);
                }
            }

            // hair-surface uptake (Robin)
            if (i == g.hair_radial_index && (g.annulus_mode || zlo < g.hair_height)) {
                const double seg = (g.annulus_mode ? zhi : std::min(zhi, g.hair_height)) - zlo;
                if (seg > 0.0)
                    sys.stiffness.add(I, I,
                                      surface_coef(I) * 2.0 * pi * g.r_eps * seg);
            }

            // root-surface uptake
            if (!g.annulus_mode && j == 0 && s.beta > 0.0) {
                const double lo = std::max(rlo, g.r_eps);
                if (rhi > lo) sys.stiffness.add(I, I, s.beta * pi * (rhi * rhi - lo * lo));
            }

            // top condition
            if (!g.annulus_mode && j + 1 == nz && s.top_bc == TopBc::Dirichlet)
                sys.dirichlet.push_back({I, s.top_value});
            // outer Dirichlet in annulus mode
            if (g.annulus_mode && i + 1 == nr) sys.dirichlet.push_back({I, g.outer_value});
        }
    }
    return out;
}

} // namespace detail

/// Area-weighted average of the fluid cross-section at z-row j: over the
/// annulus outside the hair below the tip, over the full disc above it.
inline double row_average(const AxiGrid& g, const std::vector<double>& u, std::size_t j) {
    const bool hair_zone = !g.annulus_mode && g.z_nodes[j] < g.hair_height;
    double tot = 0.0, area = 0.0;
    for (std::size_t i = 0; i < g.nr(); ++i) {
        if (!g.active(i, j)) continue;
        double lo = g.rcv_lo(i);
        const double hi = g.rcv_hi(i);
        if (hair_zone || g.annulus_mode) lo = std::max(lo, g.r_eps);
        if (hi <= lo) continue;
        const double a = std::numbers::pi * (hi * hi - lo * lo);
        tot += u[g.node_index(i, j)] * a;
        area += a;
    }
    return tot / area;
}

/// Discrete boundary fluxes of a (steady or instantaneous) field: hair-surface
/// uptake, root-surface uptake, and influx through the top. These are the
/// exact flux expressions the conservative scheme balances.
inline void sum_boundary_fluxes(const Scenario& s, const AxiGrid& g,
                                const std::vector<double>& u, double K, double& hair_uptake,
                                double& root_uptake, double& top_influx) {
    const double pi = std::numbers::pi;
    hair_uptake = root_uptake = top_influx = 0.0;
    const std::size_t i_h = g.hair_radial_index;
    for (std::size_t j = 0; j < g.nz(); ++j) {
        if (!g.active(i_h, j)) continue;
        const double zlo = g.zcv_lo(j);
        const double zhi = g.annulus_mode ? g.zcv_hi(j) : std::min(g.zcv_hi(j), g.hair_height);
        if (zhi > zlo)
            hair_uptake += K * s.uptake.value(u[g.node_index(i_h, j)]) * 2.0 * pi * g.r_eps *
                           (zhi - zlo);
    }
    if (!g.annulus_mode && s.beta > 0.0) {
        for (std::size_t i = 0; i < g.nr(); ++i) {
            if (!g.active(i, 0)) continue;
            const double lo = std::max(g.rcv_lo(i), g.r_eps);
            const double hi = g.rcv_hi(i);
            if (hi > lo)
                root_uptake += s.beta * u[g.node_index(i, 0)] * pi * (hi * hi - lo * lo);
        }
    }
    if (!g.annulus_mode && s.top_bc == TopBc::Dirichlet) {
        const std::size_t jt = g.nz() - 1;
        const double dz = g.z_nodes[jt] - g.z_nodes[jt - 1];
        for (std::size_t i = 0; i < g.nr(); ++i) {
            const double lo = g.rcv_lo(i), hi = g.rcv_hi(i);
            top_influx += s.D_u *
                          (u[g.node_index(i, jt)] - u[g.node_index(i, jt - 1)]) / dz * pi *
                          (hi * hi - lo * lo);
        }
    }
}

/// Steady or transient solve of the resolved problem on the given grid.
/// Nonlinear uptake is handled by Picard with the surface coefficient frozen
/// at g(u*)/u* from the previous iterate.
inline ReferenceSolution solve_reference(const Scenario& s, const AxiGrid& grid_in) {
    s.ensure_valid();
    auto grid = std::make_shared<AxiGrid>(grid_in);
    const std::size_t n = grid->nr() * grid->nz();
    const double K = s.epsilon * s.epsilon * s.kappa / grid->r_eps;

    ReferenceSolution sol;
    sol.grid = grid;
    sol.scenario = s;

    auto assemble_with = [&](const std::vector<double>& u_star) {
        return detail::assemble_axi(s, *grid, [&](std::size_t I) {
            return K * s.uptake.ratio(std::max(u_star[I], 0.0));
        });
    };

    std::vector<double> u(n, 0.0);
    for (std::size_t j = 0; j < grid->nz(); ++j)
        for (std::size_t i = 0; i < grid->nr(); ++i)
            if (grid->active(i, j))
                u[grid->node_index(i, j)] = s.initial_value(grid->z_nodes[j]);

    auto steady_of = [&](const std::vector<double>& u_star) {
        auto asm_ = assemble_with(u_star);
        LinearSystem ls;
        ls.matrix = std::move(asm_.sys.stiffness);
        ls.rhs = std::move(asm_.sys.load);
        for (const auto& d : asm_.sys.dirichlet) ls.set_dirichlet(d.row, d.value);
        return solve_linear(ls);
    };

    if (s.mode == RunMode::Steady) {
        sol.steady = true;
        sol.values = s.uptake.is_linear() ? steady_of(u)
                                          : detail::picard_fixed_point(u, steady_of);
    } else {
        sol.steady = false;
        TimeStepper ts{s.dt, s.t_end};
        ts.check();
        Field state;
        state.values = u;
        state.time = 0.0;
        state.grid = std::make_shared<Grid1D>();  // grid bookkeeping unused here

        auto frozen = assemble_with(u);
        double mass_prev = 0.0;
        for (std::size_t I = 0; I < n; ++I) mass_prev += frozen.sys.volumes[I] * u[I];

        for (std::size_t k = 0; k < ts.n_steps(); ++k) {
            const Field prev = state;
            if (s.uptake.is_linear()) {
                state = step_backward_euler(frozen.sys, prev, s.dt);
            } else {
                state.values = detail::picard_fixed_point(
                    prev.values,
                    [&](const std::vector<double>& u_star) {
                        frozen = assemble_with(u_star);
                        return step_backward_euler(frozen.sys, prev, s.dt).values;
                    },
                    {1e-10, 50, 0.8});
                state.time = prev.time + s.dt;
            }

            // per-step discrete balance: (mass^{n+1}-mass^n)/dt + uptakes = influx
            double mass = 0.0;
            for (std::size_t I = 0; I < n; ++I) mass += frozen.sys.volumes[I] * state.values[I];
            double uptake = 0.0, root = 0.0, influx = 0.0;
            sum_boundary_fluxes(s, *grid, state.values, K, uptake, root, influx);
            const double budget = std::abs(influx) + std::abs(uptake) + std::abs(root) +
                                  std::abs(mass - mass_prev) / s.dt + 1e-300;
            sol.balance_residuals.push_back(
                std::abs((mass - mass_prev) / s.dt + uptake + root - influx) / budget);
            sol.times.push_back(state.time);
            sol.mass_history.push_back(mass);
            sol.surface_avg_history.push_back(row_average(*grid, state.values, 0));
            mass_prev = mass;
        }
        sol.values = state.values;
        sol.time = state.time;
    }

    for (std::size_t j = 0; j < grid->nz(); ++j)
        for (std::size_t i = 0; i < grid->nr(); ++i)
            if (!grid->active(i, j))
                sol.values[grid->node_index(i, j)] = std::numeric_limits<double>::quiet_NaN();
    return sol;
}

/// Cross-section average at height z, linearly interpolated between node rows.
inline double cell_average_profile(const ReferenceSolution& sol, double z) {
    const AxiGrid& g = *sol.grid;
    if (z < g.z_nodes.front() - 1e-12 || z > g.z_nodes.back() + 1e-12)
        throw DomainError("cell average requested outside [0, M]");
    z = std::clamp(z, g.z_nodes.front(), g.z_nodes.back());
    auto it = std::upper_bound(g.z_nodes.begin(), g.z_nodes.end(), z);
    if (it == g.z_nodes.begin()) return row_average(g, sol.values, 0);
    if (it == g.z_nodes.end()) return row_average(g, sol.values, g.nz() - 1);
    const std::size_t j1 = std::size_t(it - g.z_nodes.begin());
    const std::size_t j0 = j1 - 1;
    const double t = (z - g.z_nodes[j0]) / (g.z_nodes[j1] - g.z_nodes[j0]);
    // averaging regions can differ across the tip plane; stay within one side
    if (t == 0.0) return row_average(g, sol.values, j0);
    return (1.0 - t) * row_average(g, sol.values, j0) + t * row_average(g, sol.values, j1);
}

/// Radial profile (r, u) at the node row nearest to z, skipping hole nodes.
inline std::vector<std::pair<double, double>> slice_profile(const ReferenceSolution& sol,
                                                            double z) {
    const AxiGrid& g = *sol.grid;
    std::size_t jbest = 0;
    double dbest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g.nz(); ++j) {
        const double d = std::abs(g.z_nodes[j] - z);
        if (d < dbest) {
            dbest = d;
            jbest = j;
        }
    }
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < g.nr(); ++i)
        if (g.active(i, jbest)) out.emplace_back(g.r_nodes[i], sol.values[g.node_index(i, jbest)]);
    return out;
}

/// u on the hair surface r = r_eps for z-nodes within the hair zone.
inline std::vector<std::pair<double, double>> surface_profile(const ReferenceSolution& sol) {
    const AxiGrid& g = *sol.grid;
    std::vector<std::pair<double, double>> out;
    for (std::size_t j = 0; j < g.nz(); ++j) {
        if (!g.annulus_mode && g.z_nodes[j] > g.hair_height) break;
        out.emplace_back(g.z_nodes[j], sol.values[g.node_index(g.hair_radial_index, j)]);
    }
    return out;
}

struct UptakeReport {
    double hair_uptake = 0.0;
    double root_uptake = 0.0;
    double top_influx = 0.0;
    double imbalance() const { return top_influx - hair_uptake - root_uptake; }
    double relative_imbalance() const {
        const double scale = std::max({std::abs(top_influx), std::abs(hair_uptake),
                                       std::abs(root_uptake), 1e-300});
        return std::abs(imbalance()) / scale;
    }
};

/// Boundary-integrated uptakes and influx of a steady solution.
inline UptakeReport total_uptake(const ReferenceSolution& sol) {
    if (!sol.steady) throw ModeError("total_uptake applies to steady solutions");
    const AxiGrid& g = *sol.grid;
    const double K = sol.scenario.epsilon * sol.scenario.epsilon * sol.scenario.kappa / g.r_eps;
    UptakeReport rep;
    sum_boundary_fluxes(sol.scenario, g, sol.values, K, rep.hair_uptake, rep.root_uptake,
                        rep.top_influx);
    return rep;
}

/// Volume average of u over the fluid part of the hair zone (annulus region
/// below the tip plane).
inline double hair_zone_average(const ReferenceSolution& sol) {
    const AxiGrid& g = *sol.grid;
    const double L = g.annulus_mode ? g.z_nodes.back() : g.hair_height;
    double tot = 0.0, vol = 0.0;
    for (std::size_t j = 0; j < g.nz(); ++j) {
        const double zlo = g.zcv_lo(j), zhi = std::min(g.zcv_hi(j), L);
        if (zhi <= zlo) continue;
        for (std::size_t i = 0; i < g.nr(); ++i) {
            if (!g.active(i, j)) continue;
            const double lo = std::max(g.rcv_lo(i), g.r_eps);
            const double hi = g.rcv_hi(i);
            if (hi <= lo) continue;
            const double v = std::numbers::pi * (hi * hi - lo * lo) * (zhi - zlo);
            double uval = sol.values[g.node_index(i, j)];
            if (std::isnan(uval)) continue;
            tot += uval * v;
            vol += v;
        }
    }
    return tot / vol;
}

/// Volume of the fluid part of the hair zone matching hair_zone_average.
inline double hair_zone_volume(const ReferenceSolution& sol) {
    const AxiGrid& g = *sol.grid;
    const double L = g.annulus_mode ? g.z_nodes.back() : g.hair_height;
    return std::numbers::pi * (g.rho_cell * g.rho_cell - g.r_eps * g.r_eps) * L;
}

} // namespace hairhom
