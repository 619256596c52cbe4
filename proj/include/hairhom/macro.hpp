#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "hairhom/banded.hpp"
#include "hairhom/cell_psi.hpp"
#include "hairhom/errors.hpp"
#include "hairhom/grid.hpp"
#include "hairhom/roots.hpp"
#include "hairhom/scenario.hpp"
#include "hairhom/time_stepping.hpp"

namespace hairhom {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Linear effective sink rate: 2 pi kappa in the standard limit, divided by
/// 1 + lambda kappa / D_u in the distinguished limit.
inline double sink_coefficient(Regime regime, double kappa, double D_u, double lambda) {
    if (regime == Regime::StandardA) return two_pi * kappa / 1.0;
    return two_pi * kappa / (1.0 + lambda * kappa / D_u);
}

namespace detail {

/// Shared coefficient block for the u0/u1/U2 problems. Regime A uses f = 1
/// and carries the lambda coupling explicitly; regime B folds lambda into f.
/// Evaluating both regimes through the same expressions makes the lambda = 0
/// collapse bit-exact.
struct MacroCoefficients {
    double f;            // 1 + lambda kappa/D (distinguished), exactly 1 otherwise
    double S;            // 2 pi kappa / f
    double lam_kD;       // lambda kappa / D in the standard limit, else 0
    double kappa_tilde;  // lambda kappa / D in the distinguished limit, else 0
    double u2_source;    // multiplies u0 in the U2 equation (includes psi mean)
    double u2_coupling;  // multiplies (u1 - lam_kD u0) in the U2 equation
    double u2_flux;      // multiplies du0/dn in the U2 interface condition
    double u2_init;      // multiplies u_in in the U2 initial condition
    double recon;        // 2 pi (kappa/D)/f, the psi coefficient in u2
};

inline MacroCoefficients macro_coefficients(Regime regime, double kappa, double D_u,
                                            double lambda, double psi_mean) {
    MacroCoefficients c{};
    const bool dist = regime != Regime::StandardA;
    c.f = dist ? 1.0 + lambda * kappa / D_u : 1.0;
    c.S = two_pi * kappa / c.f;
    c.lam_kD = dist ? 0.0 : lambda * kappa / D_u;
    c.kappa_tilde = dist ? lambda * kappa / D_u : 0.0;
    c.u2_source = 4.0 * std::numbers::pi * std::numbers::pi * kappa * kappa / D_u * psi_mean /
                  (c.f * c.f);
    c.u2_coupling = dist ? 0.0 : two_pi * kappa * c.lam_kD;
    c.u2_flux = -c.S * psi_mean;
    c.u2_init = -(two_pi * (kappa / D_u) / c.f) * psi_mean;
    c.recon = two_pi * (kappa / D_u) / c.f;
    return c;
}

inline MacroCoefficients macro_coefficients(const Scenario& s, double psi_mean) {
    const Regime r = s.regime == Regime::FullReference ? Regime::DistinguishedB : s.regime;
    const double lambda = r == Regime::StandardA ? lambda_standard(s.epsilon, s.a_eps)
                                                 : lambda_distinguished(s.epsilon, s.a_eps);
    return macro_coefficients(r, s.kappa, s.D_u, lambda, psi_mean);
}

} // namespace detail

/// Hair-surface concentration h solving  h + kappa_tilde g(h) = u0. The
/// Michaelis-Menten case uses the explicit quadratic root in its
/// cancellation-free form; other monotone laws go through safeguarded Newton
/// on the bracket [0, u0].
inline double h_of_u0(double u0_value, double kappa_tilde, const Uptake& g) {
    if (u0_value < 0.0) throw ValidationError("h_of_u0 needs u0 >= 0");
    if (kappa_tilde < 0.0) throw ValidationError("h_of_u0 needs kappa_tilde >= 0");
    if (kappa_tilde == 0.0) return u0_value;
    if (u0_value == 0.0) return 0.0;

    switch (g.kind()) {
        case UptakeKind::Linear:
            return u0_value / (1.0 + kappa_tilde);
        case UptakeKind::MichaelisMenten: {
            const double b = kappa_tilde + 1.0 - u0_value;
            const double disc = std::sqrt(b * b + 4.0 * u0_value);
            return b >= 0.0 ? 2.0 * u0_value / (disc + b) : 0.5 * (disc - b);
        }
        case UptakeKind::Custom: {
            auto f = [&](double h) { return h + kappa_tilde * g.value(h) - u0_value; };
            auto df = [&](double h) {
                const double s = g.slope(h);
                if (s < 0.0)
                    throw ValidationError("uptake law is not monotone (g' < 0 at iterate)");
                return 1.0 + kappa_tilde * s;
            };
            const double tol = 5e-14 * (1.0 + u0_value);
            return newton_scalar(f, df, u0_value / (1.0 + kappa_tilde), tol, 100,
                                 Bracket{0.0, u0_value})
                .root;
        }
    }
    return 0.0;
}

/// Volumetric effective sink at concentration u0 for the scenario's regime:
/// S u0 (linear), 2 pi kappa g(u0) (standard), 2 pi kappa g(h(u0))
/// (distinguished).
inline double effective_sink(double u0_value, const Scenario& s) {
    if (s.regime == Regime::FullReference)
        throw ValidationError("effective_sink is a macroscopic-limit quantity");
    const auto c = detail::macro_coefficients(s, 0.0);
    if (s.uptake.is_linear()) return c.S * u0_value;
    if (s.regime == Regime::StandardA) return two_pi * s.kappa * s.uptake.value(u0_value);
    return two_pi * s.kappa * s.uptake.value(h_of_u0(u0_value, c.kappa_tilde, s.uptake));
}

namespace detail {

/// sink(u)/u with the u -> 0 limit, used to freeze the Picard coefficient.
inline double sink_ratio(double u, const Scenario& s, const MacroCoefficients& c) {
    if (s.uptake.is_linear()) return c.S;
    if (u < 1e-12) {
        const double g0 = s.uptake.slope(0.0);
        if (s.regime == Regime::StandardA) return two_pi * s.kappa * g0;
        return two_pi * s.kappa * g0 / (1.0 + c.kappa_tilde * g0);
    }
    return effective_sink(u, s) / u;
}

} // namespace detail

/// Steady solution of  D u'' = S u chi_[0,L]  with Robin uptake -beta u at
/// x = 0 and Dirichlet data at x = M: cosh profile inside the hair zone,
/// linear continuation above. Analytic oracle for the linear solvers.
struct MacroClosedForm {
    double S = 0.0, D = 1.0, beta = 0.0, L = 0.5, M = 1.0, top = 1.0;
    double m = 0.0, sigma = 0.0, amplitude = 1.0;

    double value(double x) const {
        if (S == 0.0) return top * (D + beta * std::min(x, M)) / (D + beta * M);
        if (x <= L) return amplitude * (std::cosh(m * x) + sigma * std::sinh(m * x));
        return amplitude * (phi_L() + dphi_L() * (x - L));
    }
    double derivative(double x) const {
        if (S == 0.0) return top * beta / (D + beta * M);
        if (x <= L) return amplitude * m * (std::sinh(m * x) + sigma * std::cosh(m * x));
        return amplitude * dphi_L();
    }
    double phi_L() const { return std::cosh(m * L) + sigma * std::sinh(m * L); }
    double dphi_L() const { return m * (std::sinh(m * L) + sigma * std::cosh(m * L)); }
};

inline MacroClosedForm macro_steady_closed_form(double S, double D, double beta, double L,
                                                double M, double top = 1.0) {
    MacroClosedForm cf;
    cf.S = S;
    cf.D = D;
    cf.beta = beta;
    cf.L = L;
    cf.M = M;
    cf.top = top;
    if (S > 0.0) {
        cf.m = std::sqrt(S / D);
        cf.sigma = beta / (D * cf.m);
        cf.amplitude = top / (cf.phi_L() + cf.dphi_L() * (M - L));
    }
    return cf;
}

// ---------------------------------------------------------------------------
// 1D conservative assembly and the macroscopic solvers
// ---------------------------------------------------------------------------

namespace detail {

struct TopCondition {
    bool dirichlet = true;
    double value = 1.0;   // Dirichlet value or Neumann influx D u'(R)
};

/// Vertex-centered finite volumes for  V du/dt = (D u')' - react u + src
/// with Robin -beta u at the left end and the given top condition.
/// react and src are per-node densities weighted by the supplied measures
/// (which is how the sink indicator chi_[0,L] stays conservative).
inline SemiDiscreteSystem assemble_1d(const Grid1D& g, double D,
                                      const std::vector<double>& react_coef,
                                      const std::vector<double>& react_measure,
                                      const std::vector<double>& src_density,
                                      const std::vector<double>& src_measure, double robin0,
                                      const TopCondition& top) {
    const std::size_t n = g.size();
    SemiDiscreteSystem sys;
    sys.stiffness = BandedMatrix(n, 1);
    sys.load.assign(n, 0.0);
    sys.volumes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sys.volumes[i] = g.cv_measure(i);
        if (i > 0) {
            const double c = D / g.spacing[i - 1];
            sys.stiffness.add(i, i, c);
            sys.stiffness.add(i, i - 1, -c);
        }
        if (i + 1 < n) {
            const double c = D / g.spacing[i];
            sys.stiffness.add(i, i, c);
            sys.stiffness.add(i, i + 1, -c);
        }
        sys.stiffness.add(i, i, react_coef[i] * react_measure[i]);
        sys.load[i] = src_density[i] * src_measure[i];
    }
    sys.stiffness.add(0, 0, robin0);
    if (top.dirichlet)
        sys.dirichlet.push_back({n - 1, top.value});
    else
        sys.load[n - 1] += top.value;
    return sys;
}

/// Measure of CV_i inside the sink region [0, L].
inline std::vector<double> sink_measures(const Grid1D& g) {
    const double L = g.interface();
    std::vector<double> m(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        m[i] = std::max(0.0, std::min(g.cv_hi(i), L) - g.cv_lo(i));
    return m;
}

inline std::vector<double> cv_measures(const Grid1D& g) {
    std::vector<double> m(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) m[i] = g.cv_measure(i);
    return m;
}

inline std::vector<double> steady_solve(const SemiDiscreteSystem& sys) {
    LinearSystem ls;
    ls.matrix = sys.stiffness;
    ls.rhs = sys.load;
    for (const auto& d : sys.dirichlet) ls.set_dirichlet(d.row, d.value);
    return solve_linear(ls);
}

/// One-sided second-order derivative of u0 at the interface node, taken from
/// the hair-free side where the steady linear profile is exactly linear.
inline double interface_gradient(const Field& u0) {
    const auto& g = *u0.grid;
    const std::size_t i = g.interface_index;
    if (i + 2 < g.size()) {
        const double h = g.spacing[i];
        return (-3.0 * u0.values[i] + 4.0 * u0.values[i + 1] - u0.values[i + 2]) / (2.0 * h);
    }
    return (u0.values[i + 1] - u0.values[i]) / g.spacing[i];
}

struct PicardOptions {
    double tol = 1e-10;
    int max_iter = 200;
    double relax = 0.8;
};

/// Frozen-coefficient Picard loop around a linear solve u = solve(coef(u)).
/// Under-relaxes when the update norm grows.
template <class AssembleSolve>
std::vector<double> picard_fixed_point(std::vector<double> u, AssembleSolve&& solve_for,
                                       const PicardOptions& opt = {}) {
    std::vector<double> history;
    double prev_update = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_iter; ++it) {
        std::vector<double> next = solve_for(u);
        double upd = 0.0, scale = 1e-300;
        for (std::size_t i = 0; i < u.size(); ++i) {
            upd = std::max(upd, std::abs(next[i] - u[i]));
            scale = std::max(scale, std::abs(next[i]));
        }
        const double rel = upd / scale;
        history.push_back(rel);
        if (rel > prev_update)  // oscillating: damp the step
            for (std::size_t i = 0; i < u.size(); ++i)
                next[i] = opt.relax * next[i] + (1.0 - opt.relax) * u[i];
        u = std::move(next);
        if (rel <= opt.tol) return u;
        prev_update = rel;
    }
    throw SolverError("Picard iteration did not converge", history.back(), history);
}

} // namespace detail

/// Macroscopic zeroth-order solution on [0, M]; steady or transient per the
/// scenario mode. The lateral symmetry of the admissible data is what makes
/// this 1D problem equal to the 3D macroscopic one; Scenario enforces it.
inline Field solve_u0(const Scenario& s, std::size_t n_cells = 1024) {
    s.ensure_valid();
    auto grid = std::make_shared<Grid1D>(make_macro_grid(s.L, s.M, n_cells));
    const auto coef = detail::macro_coefficients(s, 0.0);
    const auto sinkm = detail::sink_measures(*grid);
    const std::vector<double> zeros(grid->size(), 0.0);
    const detail::TopCondition top{s.top_bc == TopBc::Dirichlet,
                                   s.top_bc == TopBc::Dirichlet ? s.top_value : 0.0};

    auto assemble = [&](const std::vector<double>& u_star) {
        std::vector<double> react(grid->size());
        for (std::size_t i = 0; i < grid->size(); ++i)
            react[i] = sinkm[i] > 0.0 ? detail::sink_ratio(std::max(u_star[i], 0.0), s, coef)
                                      : 0.0;
        return detail::assemble_1d(*grid, s.D_u, react, sinkm, zeros, zeros, s.beta, top);
    };

    Field f = make_field(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) f.values[i] = s.initial_value(grid->nodes[i]);

    if (s.mode == RunMode::Steady) {
        if (s.uptake.is_linear()) {
            f.values = detail::steady_solve(assemble(f.values));
        } else {
            f.values = detail::picard_fixed_point(
                f.values, [&](const std::vector<double>& u) {
                    return detail::steady_solve(assemble(u));
                });
        }
        f.time = 0.0;
        return f;
    }

    TimeStepper ts{s.dt, s.t_end};
    ts.check();
    const std::size_t steps = ts.n_steps();
    if (s.uptake.is_linear()) {
        auto sys = assemble(f.values);
        for (std::size_t k = 0; k < steps; ++k) f = step_backward_euler(sys, f, s.dt);
    } else {
        for (std::size_t k = 0; k < steps; ++k) {
            const Field prev = f;
            std::vector<double> u = detail::picard_fixed_point(
                prev.values,
                [&](const std::vector<double>& u_star) {
                    return step_backward_euler(assemble(u_star), prev, s.dt).values;
                },
                {1e-10, 50, 0.8});
            f.values = std::move(u);
            f.time = prev.time + s.dt;
        }
    }
    return f;
}

namespace detail {

/// Assemble the u1 problem on the hair-zone grid given u0 samples there.
inline SemiDiscreteSystem assemble_u1(const Grid1D& sub, const Scenario& s,
                                      const MacroCoefficients& c,
                                      const std::vector<double>& u0_on_sub) {
    const std::vector<double> react(sub.size(), c.S);
    std::vector<double> src(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) src[i] = c.S * c.lam_kD * u0_on_sub[i];
    const auto meas = cv_measures(sub);
    return assemble_1d(sub, s.D_u, react, meas, src, meas, s.beta, {false, 0.0});
}

/// Assemble the U2 problem on the hair-zone grid.
inline SemiDiscreteSystem assemble_U2(const Grid1D& sub, const Scenario& s,
                                      const MacroCoefficients& c,
                                      const std::vector<double>& u0_on_sub,
                                      const std::vector<double>& u1_on_sub,
                                      double du0_dn_at_L) {
    const std::vector<double> react(sub.size(), c.S);
    std::vector<double> src(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i)
        src[i] = c.u2_source * u0_on_sub[i] +
                 c.u2_coupling * (u1_on_sub[i] - c.lam_kD * u0_on_sub[i]);
    const auto meas = cv_measures(sub);
    return assemble_1d(sub, s.D_u, react, meas, src, meas, s.beta,
                       {false, c.u2_flux * du0_dn_at_L});
}

inline std::vector<double> restrict_to_sub(const Field& u0, const Grid1D& sub) {
    return std::vector<double>(u0.values.begin(), u0.values.begin() + long(sub.size()));
}

} // namespace detail

/// First-order corrector u1 on [0, L]. The distinguished limit's u1 problem
/// has zero data, so it returns the zero field exactly.
inline Field solve_u1(const Scenario& s, const Field& u0) {
    s.ensure_valid();
    if (!s.uptake.is_linear())
        throw ValidationError("u1 corrector is defined for the linear uptake law");
    auto sub = std::make_shared<Grid1D>(hair_zone_subgrid(*u0.grid));
    Field f = make_field(sub, 0.0, u0.time);
    if (s.regime != Regime::StandardA) return f;

    const auto c = detail::macro_coefficients(s, 0.0);
    if (s.mode == RunMode::Steady) {
        f.values = detail::steady_solve(
            detail::assemble_u1(*sub, s, c, detail::restrict_to_sub(u0, *sub)));
        return f;
    }

    // transient: re-advance u0 in lockstep so the source is time-consistent
    TimeStepper ts{s.dt, s.t_end};
    ts.check();
    Field u0_t = make_field(u0.grid);
    for (std::size_t i = 0; i < u0.grid->size(); ++i)
        u0_t.values[i] = s.initial_value(u0.grid->nodes[i]);
    const auto sink = detail::sink_measures(*u0.grid);
    const std::vector<double> zeros(u0.grid->size(), 0.0);
    std::vector<double> react0(u0.grid->size());
    for (std::size_t i = 0; i < u0.grid->size(); ++i) react0[i] = sink[i] > 0.0 ? c.S : 0.0;
    const detail::TopCondition top{s.top_bc == TopBc::Dirichlet,
                                   s.top_bc == TopBc::Dirichlet ? s.top_value : 0.0};
    auto sys0 = detail::assemble_1d(*u0.grid, s.D_u, react0, sink, zeros, zeros, s.beta, top);
    for (std::size_t k = 0; k < ts.n_steps(); ++k) {
        u0_t = step_backward_euler(sys0, u0_t, s.dt);
        auto sys1 = detail::assemble_u1(*sub, s, c, detail::restrict_to_sub(u0_t, *sub));
        f = step_backward_euler(sys1, f, s.dt);
    }
    return f;
}

/// Second-order macroscopic term U2 on [0, L].
inline Field solve_U2(const Scenario& s, const Field& u0, const Field& u1, double psi_mean) {
    s.ensure_valid();
    if (!s.uptake.is_linear())
        throw ValidationError("U2 corrector is defined for the linear uptake law");
    if (!std::isfinite(psi_mean)) throw ValidationError("U2 needs the cell mean of psi");
    auto sub = std::make_shared<Grid1D>(hair_zone_subgrid(*u0.grid));
    const auto c = detail::macro_coefficients(s, psi_mean);

    if (s.kappa == 0.0) return make_field(sub, 0.0, u0.time);

    if (s.mode == RunMode::Steady) {
        Field f = make_field(sub, 0.0, u0.time);
        f.values = detail::steady_solve(
            detail::assemble_U2(*sub, s, c, detail::restrict_to_sub(u0, *sub), u1.values,
                                detail::interface_gradient(u0)));
        return f;
    }

    TimeStepper ts{s.dt, s.t_end};
    ts.check();
    // co-evolve u0, u1, U2
    Field u0_t = make_field(u0.grid);
    for (std::size_t i = 0; i < u0.grid->size(); ++i)
        u0_t.values[i] = s.initial_value(u0.grid->nodes[i]);
    Field u1_t = make_field(sub);
    Field f = make_field(sub);
    for (std::size_t i = 0; i < sub->size(); ++i)
        f.values[i] = c.u2_init * s.initial_value(sub->nodes[i]);

    const auto sink = detail::sink_measures(*u0.grid);
    const std::vector<double> zeros(u0.grid->size(), 0.0);
    std::vector<double> react0(u0.grid->size());
    for (std::size_t i = 0; i < u0.grid->size(); ++i) react0[i] = sink[i] > 0.0 ? c.S : 0.0;
    const detail::TopCondition top{s.top_bc == TopBc::Dirichlet,
                                   s.top_bc == TopBc::Dirichlet ? s.top_value : 0.0};
    auto sys0 = detail::assemble_1d(*u0.grid, s.D_u, react0, sink, zeros, zeros, s.beta, top);
    for (std::size_t k = 0; k < ts.n_steps(); ++k) {
        u0_t = step_backward_euler(sys0, u0_t, s.dt);
        auto u0_sub = detail::restrict_to_sub(u0_t, *sub);
        if (s.regime == Regime::StandardA) {
            auto sys1 = detail::assemble_u1(*sub, s, c, u0_sub);
            u1_t = step_backward_euler(sys1, u1_t, s.dt);
        }
        auto sys2 = detail::assemble_U2(*sub, s, c, u0_sub, u1_t.values,
                                        detail::interface_gradient(u0_t));
        f = step_backward_euler(sys2, f, s.dt);
    }
    return f;
}

/// Bundle of the macroscopic fields for one scenario.
struct MacroSolution {
    Field u0;        // on [0, M]
    Field u1, U2;    // on [0, L]
    double psi_mean = 0.0;
    Regime regime = Regime::DistinguishedB;
};

inline MacroSolution solve_macro(const Scenario& s, std::size_t n_cells, double psi_mean,
                                 bool with_correctors = true) {
    MacroSolution m;
    m.regime = s.regime;
    m.psi_mean = psi_mean;
    m.u0 = solve_u0(s, n_cells);
    if (with_correctors && s.uptake.is_linear()) {
        m.u1 = solve_u1(s, m.u0);
        m.U2 = solve_U2(s, m.u0, m.u1, psi_mean);
    } else {
        auto sub = std::make_shared<Grid1D>(hair_zone_subgrid(*m.u0.grid));
        m.u1 = make_field(sub, 0.0, m.u0.time);
        m.U2 = make_field(sub, 0.0, m.u0.time);
    }
    return m;
}

/// Two-scale second-order reconstruction at a point x = (x1, x2, x3):
///   u0 + eps u1 + eps^2 (U2 + c u0 psi(y)),  y = x_hat/eps wrapped to the
/// cell centered at the nearest hair; u0 alone above the hair zone.
inline double reconstruct_second_order(const Scenario& s, const MacroSolution& macro,
                                       const CellPsi& psi, const std::array<double, 3>& x) {
    if (x[2] < 0.0 || x[2] > s.M) throw DomainError("reconstruction point outside [0, M]");
    const double u0v = interpolate(macro.u0, x[2]);
    if (x[2] > s.L) return u0v;

    double y1 = x[0] / s.epsilon, y2 = x[1] / s.epsilon;
    y1 -= std::round(y1);
    y2 -= std::round(y2);
    const double r = s.epsilon * std::hypot(y1, y2);
    if (r < s.r_eps()) throw DomainError("reconstruction point lies inside a hair");

    const Regime regime = macro.regime == Regime::FullReference ? Regime::DistinguishedB
                                                                : macro.regime;
    const double lambda = regime == Regime::StandardA ? lambda_standard(s.epsilon, s.a_eps)
                                                      : lambda_distinguished(s.epsilon, s.a_eps);
    const auto c = detail::macro_coefficients(regime, s.kappa, s.D_u, lambda, macro.psi_mean);

    const double u1v = interpolate(macro.u1, x[2]);
    const double U2v = interpolate(macro.U2, x[2]);
    return u0v + s.epsilon * u1v +
           s.epsilon * s.epsilon * (U2v + c.recon * u0v * psi.evaluate(y1, y2));
}

} // namespace hairhom
