// hairhom: multiscale root-hair nutrient-uptake simulations.
//
// Subcommands: run a scenario, sweep a parameter, print the unit-cell
// constants, run convergence studies, and re-derive comparison norms from
// stored profiles.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "hairhom/config.hpp"
#include "hairhom/harness.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_dir) {
    hairhom::RunConfig cfg = hairhom::load_config(config_path);
    hairhom::ComparisonReport rep = hairhom::run_scenario(cfg);
    hairhom::emit_outputs(rep, out_dir);
    std::printf("psi_mean=%.17g\n", rep.psi_mean_used);
    std::printf("sink_A=%.17g\n", rep.sink_A);
    std::printf("sink_B=%.17g\n", rep.sink_B);
    std::printf("lambda=%.17g\n", rep.lambda);
    for (const auto& [k, v] : rep.norms) std::printf("%s=%.17g\n", k.c_str(), v);
    for (const auto& [k, v] : rep.ordering_flags)
        std::printf("%s=%s\n", k.c_str(), v ? "true" : "false");
    std::printf("wrote %s/profile.csv, %s/summary.kv\n", out_dir.c_str(), out_dir.c_str());
    return 0;
}

int sweep_command(const std::string& config_path, const std::string& out_dir,
                  const std::string& param, const std::string& values_csv) {
    hairhom::RunConfig cfg = hairhom::load_config(config_path);
    if (!param.empty()) cfg.sweep.param = param;
    if (!values_csv.empty()) {
        cfg.sweep.values.clear();
        for (const auto& tok : hairhom::detail::split_list(values_csv))
            cfg.sweep.values.push_back(std::strtod(tok.c_str(), nullptr));
    }
    if (!cfg.sweep.active() || cfg.sweep.values.empty())
        throw hairhom::ValidationError("sweep needs --param and --values (or a [sweep] section)");
    auto reports = hairhom::run_sweep(cfg, out_dir);
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& r = reports[k];
        std::printf("[%s] sink_B=%.17g", r.sweep_tag.c_str(), r.sink_B);
        auto flag = r.ordering_flags.find("A_under_B_over");
        if (flag != r.ordering_flags.end())
            std::printf(" A_under_B_over=%s", flag->second ? "true" : "false");
        std::printf("\n");
    }
    std::printf("wrote %zu sweep entries under %s\n", reports.size(), out_dir.c_str());
    return 0;
}

int cell_psi_command(int modes, double ewald_split) {
    const hairhom::CellPsi psi = hairhom::build_cell_psi(modes, ewald_split);
    std::printf("psi_mean=%.17g\n", psi.mean());
    std::printf("modes=%d\n", psi.modes());
    std::printf("ewald_split=%.17g\n", psi.ewald_split());
    std::printf("splitting_tail=%.3g\n", psi.splitting_tail_estimate());
    for (double r : {1e-1, 1e-2, 1e-3, 1e-4})
        std::printf("matching_residual_r%g=%.6e\n", r, hairhom::matching_residual(psi, r));
    return 0;
}

int converge_command(const std::string& config_path, int levels, const std::string& study,
                     const std::string& out_dir) {
    hairhom::RunConfig cfg = hairhom::load_config(config_path);
    auto table = hairhom::convergence_study(cfg, levels, study);
    std::printf("h,error,order\n");
    for (const auto& row : table) std::printf("%.6e,%.6e,%.4f\n", row[0], row[1], row[2]);
    if (!out_dir.empty()) {
        hairhom::ComparisonReport rep;
        rep.convergence = table;
        hairhom::emit_outputs(rep, out_dir);
    }
    return 0;
}

int compare_command(const std::string& out_dir) {
    auto norms = hairhom::compare_outputs(out_dir);
    for (const auto& [k, v] : norms) std::printf("%s=%.17g\n", k.c_str(), v);
    std::printf("wrote %s/summary_recomputed.kv\n", out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiscale nutrient-uptake simulations around a single root hair"};
    app.require_subcommand(1);

    std::string config_path, out_dir, param, values_csv, study = "macro";
    int modes = 64, levels = 3;
    double ewald_split = 2.0;

    auto* run = app.add_subcommand("run", "run one scenario and emit profiles");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    sweep->add_option("--config", config_path, "config file")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();
    sweep->add_option("--param", param, "swept parameter (a_eps, epsilon, kappa, beta, D_u)");
    sweep->add_option("--values", values_csv, "comma-separated values");

    auto* cell = app.add_subcommand("cell-psi", "print the unit-cell constants");
    cell->add_option("--modes", modes, "Fourier truncation half-width (>= 8)");
    cell->add_option("--ewald-split", ewald_split, "Ewald splitting parameter");

    auto* conv = app.add_subcommand("converge", "convergence study against analytic oracles");
    conv->add_option("--config", config_path, "config file")->required();
    conv->add_option("--levels", levels, "number of refinement levels (>= 3)");
    conv->add_option("--study", study, "macro | annulus | time");
    conv->add_option("--out", out_dir, "optional output directory for convergence.csv");

    auto* cmp = app.add_subcommand("compare", "re-derive norms from stored profiles");
    cmp->add_option("--out", out_dir, "directory holding profile.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(config_path, out_dir);
        if (sweep->parsed()) return sweep_command(config_path, out_dir, param, values_csv);
        if (cell->parsed()) return cell_psi_command(modes, ewald_split);
        if (conv->parsed()) return converge_command(config_path, levels, study, out_dir);
        if (cmp->parsed()) return compare_command(out_dir);
    } catch (const hairhom::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const hairhom::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
