#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hairhom/cell_psi.hpp"
#include "hairhom/config.hpp"
#include "hairhom/correctors.hpp"
#include "hairhom/errors.hpp"
#include "hairhom/macro.hpp"
#include "hairhom/reference.hpp"
#include "hairhom/scenario.hpp"

namespace hairhom {

struct ProfileRow {
    std::string model;   // reference | reference_avg | u0 | u1 | U2 | recon2
    std::string regime;  // standard | distinguished | reference
    double t = 0.0;
    double z = 0.0;
    double r_or_diag = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
};

/// Everything one scenario run produces: slice/profile tables, gap norms,
/// ordering flags, and the constants needed to reproduce the numbers.
struct ComparisonReport {
    std::vector<ProfileRow> profiles;
    std::map<std::string, double> norms;
    std::map<std::string, bool> ordering_flags;
    std::vector<std::array<double, 3>> convergence;  // (h, error, order)

    // reproducibility block
    double psi_mean_used = 0.0;
    double lambda = 0.0, lambda_A = 0.0, lambda_B = 0.0;
    double sink_A = 0.0, sink_B = 0.0;
    double a_eps = 0.0, epsilon = 0.0, rho = 0.25, grading = 1.0;
    double picard_tol = 1e-10, linear_tol = 1e-10;
    std::string sweep_tag;  // set for merged sweep blocks
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

/// rms with annular area weights reconstructed from the radial positions;
/// shared by run_scenario and the offline compare path so both agree.
inline double weighted_rms_gap(const std::vector<double>& rs, const std::vector<double>& a,
                               const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const double lo = i == 0 ? rs.front() : 0.5 * (rs[i - 1] + rs[i]);
        const double hi = i + 1 == rs.size() ? rs.back() : 0.5 * (rs[i] + rs[i + 1]);
        const double w = hi * hi - lo * lo;
        const double d = a[i] - b[i];
        num += w * d * d;
        den += w;
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

struct MacroRun {
    Scenario scenario;
    MacroSolution solution;
};

} // namespace detail

/// Execute the requested models on one scenario and assemble the comparison
/// tables. Deterministic for a fixed config.
inline ComparisonReport run_scenario(const RunConfig& cfg) {
    const Scenario& base = cfg.scenario;
    base.ensure_valid();

    const CellPsi psi = build_cell_psi(cfg.grids.psi_modes, cfg.grids.ewald_split);

    ComparisonReport rep;
    rep.psi_mean_used = psi.mean();
    rep.a_eps = base.a_eps;
    rep.epsilon = base.epsilon;
    rep.rho = cfg.grids.rho;
    rep.grading = cfg.grids.grading;
    rep.lambda = base.lambda();
    rep.lambda_A = lambda_standard(base.epsilon, base.a_eps);
    rep.lambda_B = lambda_distinguished(base.epsilon, base.a_eps);
    rep.sink_A = sink_coefficient(Regime::StandardA, base.kappa, base.D_u, rep.lambda_A);
    rep.sink_B = sink_coefficient(Regime::DistinguishedB, base.kappa, base.D_u, rep.lambda_B);

    std::optional<detail::MacroRun> runA, runB;
    std::optional<ReferenceSolution> ref;

    const std::string scenario_id = std::string(regime_name(base.regime)) + " a_eps=" +
                                    detail::fmt(base.a_eps, "%.6g") + " eps=" +
                                    detail::fmt(base.epsilon, "%.6g");
    const bool correctors = cfg.order > 0;
    for (ModelKind m : cfg.models) {
        try {
            switch (m) {
                case ModelKind::StandardA: {
                    Scenario s = base.with_regime(Regime::StandardA);
                    runA = detail::MacroRun{
                        s, solve_macro(s, cfg.grids.macro_cells, psi.mean(), correctors)};
                    break;
                }
                case ModelKind::DistinguishedB: {
                    Scenario s = base.with_regime(Regime::DistinguishedB);
                    runB = detail::MacroRun{
                        s, solve_macro(s, cfg.grids.macro_cells, psi.mean(), correctors)};
                    break;
                }
                case ModelKind::Reference: {
                    Scenario s = base.with_regime(Regime::FullReference);
                    const AxiGrid grid = build_axi_grid(s, cfg.grids.ref_nr, cfg.grids.ref_nz,
                                                        cfg.grids.grading);
                    ref = solve_reference(s, grid);
                    break;
                }
            }
        } catch (const SolverError& e) {
            throw SolverError("[" + scenario_id + ", model " + model_name(m) + "] " + e.what(),
                              e.residual_achieved(), e.history());
        }
    }

    // completeness: every requested model must have produced a solution
    for (ModelKind m : cfg.models) {
        const bool ok = (m == ModelKind::StandardA && runA) ||
                        (m == ModelKind::DistinguishedB && runB) ||
                        (m == ModelKind::Reference && ref);
        if (!ok)
            throw SolverError(std::string("model '") + model_name(m) +
                                  "' produced no solution",
                              0.0);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();

    // reference tables: cell-average z-profile plus radial slices
    if (ref) {
        const AxiGrid& g = *ref->grid;
        for (std::size_t j = 0; j < g.nz(); ++j)
            rep.profiles.push_back({"reference_avg", "reference", ref->time, g.z_nodes[j], nan,
                                    row_average(g, ref->values, j)});
        for (double zs : cfg.slices)
            for (const auto& [r, v] : slice_profile(*ref, zs))
                rep.profiles.push_back({"reference", "reference", ref->time, zs, r, v});
    }

    // macro tables and reconstruction slices
    auto emit_macro = [&](const detail::MacroRun& run, const char* tag) {
        const MacroSolution& m = run.solution;
        for (std::size_t i = 0; i < m.u0.grid->size(); ++i)
            rep.profiles.push_back(
                {"u0", tag, m.u0.time, m.u0.grid->nodes[i], nan, m.u0.values[i]});
        if (cfg.order >= 1)
            for (std::size_t i = 0; i < m.u1.grid->size(); ++i)
                rep.profiles.push_back(
                    {"u1", tag, m.u1.time, m.u1.grid->nodes[i], nan, m.u1.values[i]});
        if (cfg.order >= 2)
            for (std::size_t i = 0; i < m.U2.grid->size(); ++i)
                rep.profiles.push_back(
                    {"U2", tag, m.U2.time, m.U2.grid->nodes[i], nan, m.U2.values[i]});

        if (cfg.order >= 2 && ref) {
            const auto c = detail::macro_coefficients(run.scenario, psi.mean());
            for (double zs : cfg.slices) {
                const double u0v = interpolate(m.u0, zs);
                for (const auto& [r, vref] : slice_profile(*ref, zs)) {
                    (void)vref;
                    double val;
                    if (zs <= run.scenario.L && r > 0.0) {
                        const double psi_avg =
                            psi.circle_average(r / run.scenario.epsilon, 48);
                        val = u0v + run.scenario.epsilon * interpolate(m.u1, zs) +
                              run.scenario.epsilon * run.scenario.epsilon *
                                  (interpolate(m.U2, zs) + c.recon * u0v * psi_avg);
                    } else {
                        val = u0v;
                    }
                    rep.profiles.push_back({"recon2", tag, m.u0.time, zs, r, val});
                }
            }
        }
    };
    if (runA) emit_macro(*runA, "standard");
    if (runB) emit_macro(*runB, "distinguished");

    // norms: cell-average gaps over z, and per-slice radial gaps
    auto macro_norms = [&](const detail::MacroRun& run, const std::string& tag) {
        if (!ref) return;
        const AxiGrid& g = *ref->grid;
        double linf = 0.0, l2num = 0.0, l2den = 0.0;
        for (std::size_t j = 0; j < g.nz(); ++j) {
            const double w = g.zcv_hi(j) - g.zcv_lo(j);
            const double d =
                row_average(g, ref->values, j) - interpolate(run.solution.u0, g.z_nodes[j]);
            linf = std::max(linf, std::abs(d));
            l2num += w * d * d;
            l2den += w;
        }
        rep.norms["linf_avg_" + tag] = linf;
        rep.norms["l2_avg_" + tag] = std::sqrt(l2num / l2den);

        for (double zs : cfg.slices) {
            auto prof = slice_profile(*ref, zs);
            std::vector<double> rs, uref, u0c;
            for (const auto& [r, v] : prof) {
                rs.push_back(r);
                uref.push_back(v);
                u0c.push_back(interpolate(run.solution.u0, zs));
            }
            const std::string zkey = detail::fmt(zs, "%g");
            rep.norms["l2_slice_z" + zkey + "_u0_" + tag] =
                detail::weighted_rms_gap(rs, uref, u0c);
            if (cfg.order >= 2) {
                std::vector<double> rec;
                for (const auto& row : rep.profiles)
                    if (row.model == "recon2" && row.regime == tag && row.z == zs)
                        rec.push_back(row.value);
                if (rec.size() == rs.size())
                    rep.norms["l2_slice_z" + zkey + "_recon2_" + tag] =
                        detail::weighted_rms_gap(rs, uref, rec);
            }
        }
    };
    if (runA) macro_norms(*runA, "standard");
    if (runB) macro_norms(*runB, "distinguished");

    // ordering flag at the root surface
    if (ref && runA && runB && base.mode == RunMode::Steady) {
        const double avg0 = row_average(*ref->grid, ref->values, 0);
        const double a0 = runA->solution.u0.values.front();
        const double b0 = runB->solution.u0.values.front();
        rep.ordering_flags["A_under_B_over"] = (a0 < avg0) && (avg0 < b0);
        rep.norms["ref_avg_z0"] = avg0;
        rep.norms["u0_z0_standard"] = a0;
        rep.norms["u0_z0_distinguished"] = b0;
    }

    return rep;
}

// ---------------------------------------------------------------------------
// convergence studies against the analytic oracles
// ---------------------------------------------------------------------------

/// Study kinds: "macro" (steady linear u0 vs the cosh/linear closed form),
/// "annulus" (reference annulus mode vs the corrector closed form), "time"
/// (backward Euler order on the transient macro problem).
inline std::vector<std::array<double, 3>> convergence_study(const RunConfig& cfg, int levels,
                                                            const std::string& study) {
    if (levels < 3) throw ValidationError("convergence study needs at least 3 levels");
    const Scenario& base = cfg.scenario;
    std::vector<std::array<double, 3>> table;

    if (study == "macro") {
        if (!base.uptake.is_linear() || base.top_bc != TopBc::Dirichlet)
            throw ValidationError(
                "macro convergence study needs the linear steady Dirichlet configuration");
        Scenario s = base;
        s.mode = RunMode::Steady;
        if (s.regime == Regime::FullReference) s.regime = Regime::DistinguishedB;
        const double S = sink_coefficient(s.regime, s.kappa, s.D_u, s.lambda());
        const auto exact = macro_steady_closed_form(S, s.D_u, s.beta, s.L, s.M, s.top_value);
        std::size_t n = 128;
        std::vector<double> hs, errs;
        for (int l = 0; l < levels; ++l, n *= 2) {
            const Field u = solve_u0(s, n);
            double e = 0.0;
            for (std::size_t i = 0; i < u.grid->size(); ++i)
                e = std::max(e, std::abs(u.values[i] - exact.value(u.grid->nodes[i])));
            hs.push_back(s.M / double(n));
            errs.push_back(e);
        }
        for (int l = 0; l < levels; ++l)
            table.push_back({hs[std::size_t(l)], errs[std::size_t(l)],
                             l ? std::log2(errs[std::size_t(l) - 1] / errs[std::size_t(l)])
                               : std::numeric_limits<double>::quiet_NaN()});
    } else if (study == "annulus") {
        CorrectorParams p;
        p.epsilon = base.epsilon;
        p.a_eps = base.a_eps;
        p.rho = cfg.grids.rho;
        p.kappa = base.kappa;
        p.D_u = base.D_u;
        p.regime = base.regime == Regime::StandardA ? Regime::StandardA
                                                    : Regime::DistinguishedB;
        Scenario s = base;
        s.regime = Regime::FullReference;
        s.mode = RunMode::Steady;
        s.uptake = Uptake::linear();
        std::size_t n = 32;
        std::vector<double> hs, errs;
        for (int l = 0; l < levels; ++l, n *= 2) {
            const AxiGrid grid = build_annulus_grid(p, n, 8);
            const ReferenceSolution sol = solve_reference(s, grid);
            double e = 0.0;
            for (std::size_t i = 0; i < grid.nr(); ++i)
                e = std::max(e, std::abs(sol.values[grid.node_index(i, grid.nz() / 2)] -
                                         w_closed_form(p, grid.r_nodes[i])));
            hs.push_back(1.0 / double(n));
            errs.push_back(e);
        }
        for (int l = 0; l < levels; ++l)
            table.push_back({hs[std::size_t(l)], errs[std::size_t(l)],
                             l ? std::log2(errs[std::size_t(l) - 1] / errs[std::size_t(l)])
                               : std::numeric_limits<double>::quiet_NaN()});
    } else if (study == "time") {
        Scenario s = base;
        s.mode = RunMode::Transient;
        if (s.regime == Regime::FullReference) s.regime = Regime::DistinguishedB;
        s.t_end = 0.5;
        const std::size_t cells = 256;
        // reference solution at a much finer step isolates the temporal error
        Scenario sref = s;
        sref.dt = s.t_end / 2048.0;
        const Field uref = solve_u0(sref, cells);
        std::vector<double> hs, errs;
        double dt = s.t_end / 8.0;
        for (int l = 0; l < levels; ++l, dt *= 0.5) {
            Scenario sl = s;
            sl.dt = dt;
            const Field u = solve_u0(sl, cells);
            double e = 0.0;
            for (std::size_t i = 0; i < u.values.size(); ++i)
                e = std::max(e, std::abs(u.values[i] - uref.values[i]));
            hs.push_back(dt);
            errs.push_back(e);
        }
        for (int l = 0; l < levels; ++l)
            table.push_back({hs[std::size_t(l)], errs[std::size_t(l)],
                             l ? std::log2(errs[std::size_t(l) - 1] / errs[std::size_t(l)])
                               : std::numeric_limits<double>::quiet_NaN()});
    } else {
        throw ValidationError("unsupported convergence study '" + study +
                              "' (macro | annulus | time)");
    }
    return table;
}

// ---------------------------------------------------------------------------
// file emission and the offline compare path
// ---------------------------------------------------------------------------

inline void emit_outputs(const ComparisonReport& rep, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());

    {
        std::ofstream out(dir + "/profile.csv", std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/profile.csv");
        out << "model,regime,t,z,r_or_diag,value\n";
        if (!rep.sweep_tag.empty()) out << "# " << rep.sweep_tag << "\n";
        for (const auto& r : rep.profiles)
            out << r.model << ',' << r.regime << ',' << detail::fmt(r.t) << ','
                << detail::fmt(r.z) << ',' << detail::fmt(r.r_or_diag) << ','
                << detail::fmt(r.value) << '\n';
    }
    {
        std::ofstream out(dir + "/summary.kv", std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/summary.kv");
        out << "psi_mean=" << detail::fmt(rep.psi_mean_used) << '\n';
        out << "sink_A=" << detail::fmt(rep.sink_A) << '\n';
        out << "sink_B=" << detail::fmt(rep.sink_B) << '\n';
        out << "lambda=" << detail::fmt(rep.lambda) << '\n';
        out << "lambda_A=" << detail::fmt(rep.lambda_A) << '\n';
        out << "lambda_B=" << detail::fmt(rep.lambda_B) << '\n';
        out << "a_eps=" << detail::fmt(rep.a_eps) << '\n';
        out << "epsilon=" << detail::fmt(rep.epsilon) << '\n';
        out << "rho=" << detail::fmt(rep.rho) << '\n';
        out << "grading=" << detail::fmt(rep.grading) << '\n';
        out << "picard_tol=" << detail::fmt(rep.picard_tol) << '\n';
        out << "linear_tol=" << detail::fmt(rep.linear_tol) << '\n';
        for (const auto& [k, v] : rep.norms) out << k << '=' << detail::fmt(v) << '\n';
        for (const auto& [k, v] : rep.ordering_flags)
            out << k << '=' << (v ? "true" : "false") << '\n';
    }
    if (!rep.convergence.empty()) {
        std::ofstream out(dir + "/convergence.csv", std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/convergence.csv");
        out << "h,error,order\n";
        for (const auto& row : rep.convergence)
            out << detail::fmt(row[0]) << ',' << detail::fmt(row[1]) << ','
                << detail::fmt(row[2]) << '\n';
    }
}

/// Concurrent sweep: one run per value, each emitted to its own subdirectory,
/// plus a merged profile/summary assembled in sweep order.
inline std::vector<ComparisonReport> run_sweep(const RunConfig& cfg, const std::string& out_dir) {
    if (!cfg.sweep.active()) throw ValidationError("config has no sweep section");
    std::vector<std::future<ComparisonReport>> futures;
    futures.reserve(cfg.sweep.values.size());
    for (double v : cfg.sweep.values) {
        RunConfig entry = cfg;
        entry.sweep = {};
        apply_sweep_value_unchecked(entry.scenario, cfg.sweep.param, v);
        entry.scenario.ensure_valid();
        futures.push_back(
            std::async(std::launch::async, [entry]() { return run_scenario(entry); }));
    }
    std::vector<ComparisonReport> reports;
    for (std::size_t k = 0; k < futures.size(); ++k) {
        ComparisonReport r = futures[k].get();
        r.sweep_tag = "sweep " + cfg.sweep.param + " = " +
                      detail::fmt(cfg.sweep.values[k], "%.6g");
        reports.push_back(std::move(r));
    }

    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const std::string sub = out_dir + "/" + cfg.sweep.param + "=" +
                                    detail::fmt(cfg.sweep.values[k], "%.6g");
            emit_outputs(reports[k], sub);
        }
        // merged artifacts, sequential in sweep order
        fs::create_directories(out_dir);
        std::ofstream prof(out_dir + "/profile.csv", std::ios::binary);
        prof << "model,regime,t,z,r_or_diag,value\n";
        std::ofstream summ(out_dir + "/summary.kv", std::ios::binary);
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const auto& r = reports[k];
            prof << "# " << r.sweep_tag << "\n";
            for (const auto& row : r.profiles)
                prof << row.model << ',' << row.regime << ',' << detail::fmt(row.t) << ','
                     << detail::fmt(row.z) << ',' << detail::fmt(row.r_or_diag) << ','
                     << detail::fmt(row.value) << '\n';
            const std::string pre =
                cfg.sweep.param + "_" + detail::fmt(cfg.sweep.values[k], "%.6g") + "_";
            summ << pre << "sink_A=" << detail::fmt(r.sink_A) << '\n';
            summ << pre << "sink_B=" << detail::fmt(r.sink_B) << '\n';
            summ << pre << "lambda_B=" << detail::fmt(r.lambda_B) << '\n';
            for (const auto& [key, v] : r.norms) summ << pre << key << '=' << detail::fmt(v) << '\n';
            for (const auto& [key, v] : r.ordering_flags)
                summ << pre << key << '=' << (v ? "true" : "false") << '\n';
        }
        // monotone approach of the reference average toward the distinguished
        // limit along the sweep, when both are available
        bool have = reports.size() >= 2;
        std::vector<double> gaps;
        for (const auto& r : reports) {
            auto a = r.norms.find("ref_avg_z0");
            auto b = r.norms.find("u0_z0_distinguished");
            if (a == r.norms.end() || b == r.norms.end()) {
                have = false;
                break;
            }
            gaps.push_back(std::abs(b->second - a->second));
        }
        if (have) {
            bool mono = true;
            for (std::size_t k = 0; k + 1 < gaps.size(); ++k) mono &= gaps[k] > gaps[k + 1];
            summ << "gap_to_B_monotone=" << (mono ? "true" : "false") << '\n';
        }
    }
    return reports;
}

/// Re-derive the gap norms from a stored profile.csv; returns the recomputed
/// norms and writes them alongside the originals.
inline std::map<std::string, double> compare_outputs(const std::string& dir) {
    std::ifstream in(dir + "/profile.csv");
    if (!in) throw ValidationError("no profile.csv in '" + dir + "'");
    std::string line;
    std::getline(in, line);  // header
    struct Key {
        std::string model, regime;
        double z;
    };
    std::vector<ProfileRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        std::stringstream ss(line);
        ProfileRow r;
        std::string tok;
        std::getline(ss, r.model, ',');
        std::getline(ss, r.regime, ',');
        std::getline(ss, tok, ',');
        r.t = std::strtod(tok.c_str(), nullptr);
        std::getline(ss, tok, ',');
        r.z = std::strtod(tok.c_str(), nullptr);
        std::getline(ss, tok, ',');
        r.r_or_diag = std::strtod(tok.c_str(), nullptr);
        std::getline(ss, tok, ',');
        r.value = std::strtod(tok.c_str(), nullptr);
        rows.push_back(std::move(r));
    }

    // reference cell-average polyline and u0 polylines per regime
    std::vector<std::pair<double, double>> ref_avg;
    std::map<std::string, std::vector<std::pair<double, double>>> u0;
    for (const auto& r : rows) {
        if (r.model == "reference_avg") ref_avg.emplace_back(r.z, r.value);
        if (r.model == "u0") u0[r.regime].emplace_back(r.z, r.value);
    }
    auto interp = [](const std::vector<std::pair<double, double>>& poly, double z) {
        if (poly.empty()) return 0.0;
        if (z <= poly.front().first) return poly.front().second;
        if (z >= poly.back().first) return poly.back().second;
        for (std::size_t i = 0; i + 1 < poly.size(); ++i)
            if (z <= poly[i + 1].first) {
                const double t = (z - poly[i].first) / (poly[i + 1].first - poly[i].first);
                return (1 - t) * poly[i].second + t * poly[i + 1].second;
            }
        return poly.back().second;
    };

    std::map<std::string, double> norms;
    for (const auto& [regime, poly] : u0) {
        if (ref_avg.empty()) break;
        double linf = 0.0, num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < ref_avg.size(); ++j) {
            const double zlo = j == 0 ? ref_avg.front().first
                                      : 0.5 * (ref_avg[j - 1].first + ref_avg[j].first);
            const double zhi = j + 1 == ref_avg.size()
                                   ? ref_avg.back().first
                                   : 0.5 * (ref_avg[j].first + ref_avg[j + 1].first);
            const double d = ref_avg[j].second - interp(poly, ref_avg[j].first);
            linf = std::max(linf, std::abs(d));
            num += (zhi - zlo) * d * d;
            den += (zhi - zlo);
        }
        norms["linf_avg_" + regime] = linf;
        norms["l2_avg_" + regime] = std::sqrt(num / den);
    }

    // slice gaps between stored reference and recon2 rows
    std::map<double, std::vector<std::pair<double, double>>> ref_slices;
    for (const auto& r : rows)
        if (r.model == "reference") ref_slices[r.z].emplace_back(r.r_or_diag, r.value);
    for (const auto& [zs, refrows] : ref_slices) {
        for (const auto& regime : {std::string("standard"), std::string("distinguished")}) {
            std::vector<double> rs, uref, rec;
            for (const auto& [r, v] : refrows) {
                rs.push_back(r);
                uref.push_back(v);
            }
            for (const auto& row : rows)
                if (row.model == "recon2" && row.regime == regime && row.z == zs)
                    rec.push_back(row.value);
            const std::string zkey = detail::fmt(zs, "%g");
            if (!rec.empty() && rec.size() == rs.size())
                norms["l2_slice_z" + zkey + "_recon2_" + regime] =
                    detail::weighted_rms_gap(rs, uref, rec);
            std::vector<double> u0c(rs.size(), interp(u0[regime], zs));
            if (!u0[regime].empty())
                norms["l2_slice_z" + zkey + "_u0_" + regime] =
                    detail::weighted_rms_gap(rs, uref, u0c);
        }
    }

    std::ofstream out(dir + "/summary_recomputed.kv", std::ios::binary);
    for (const auto& [k, v] : norms) out << k << '=' << detail::fmt(v) << '\n';
    return norms;
}

} // namespace hairhom
