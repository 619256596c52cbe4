#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hairhom/harness.hpp"

using namespace hairhom;

namespace {

RunConfig config_from(const std::string& text) {
    std::stringstream ss(text);
    return parse_config(ss, "<test>");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("hairhom_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("config: empty input keeps the defaults but demands a regime") {
    try {
        config_from("");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        REQUIRE(e.issues().size() == 1);
        CHECK(e.issues()[0].find("regime") != std::string::npos);
    }
}

TEST_CASE("config: table defaults and the derived lambda") {
    RunConfig cfg = config_from("regime = distinguished\na_eps = 0.01\n");
    CHECK(cfg.scenario.epsilon == 0.5);
    CHECK(cfg.scenario.L == 0.5);
    CHECK(cfg.scenario.M == 1.0);
    CHECK(cfg.scenario.beta == 0.0);
    CHECK(cfg.scenario.D_u == 1.0);
    CHECK(cfg.scenario.kappa == 1.0);
    CHECK(cfg.scenario.lambda() == Catch::Approx(1.151293).margin(1e-6));
    CHECK(cfg.models.size() == 1);
    CHECK(cfg.models[0] == ModelKind::DistinguishedB);
}

TEST_CASE("config: lambda key inverts the scale relation per regime") {
    RunConfig b = config_from("regime = distinguished\nlambda = 1.1512925464970228\n");
    CHECK(b.scenario.a_eps == Catch::Approx(0.01).epsilon(1e-12));
    RunConfig a = config_from("regime = standard\nlambda = 1.1512925464970228\n");
    CHECK(a.scenario.a_eps == Catch::Approx(std::exp(-1.1512925464970228 / 0.5)).epsilon(1e-12));
}

TEST_CASE("config: violated invariants are all reported") {
    try {
        config_from("regime = standard\n[scenario]\nL = 1.5\nM = 1.0\nbeta = -2\n");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        bool saw_LM = false, saw_beta = false;
        for (const auto& msg : e.issues()) {
            if (msg.find("L and M") != std::string::npos) saw_LM = true;
            if (msg.find("beta") != std::string::npos) saw_beta = true;
        }
        CHECK(saw_LM);
        CHECK(saw_beta);
    }
}

TEST_CASE("config: parse errors carry line numbers") {
    std::stringstream ss("regime = standard\nnot a key value\n");
    try {
        parse_config(ss, "bad.cfg");
        FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
        CHECK(e.line() == 2);
    }
    std::stringstream dup("regime = standard\nregime = standard\n");
    CHECK_THROWS_AS(parse_config(dup, "dup.cfg"), ConfigParseError);
    std::stringstream badnum("regime = standard\nkappa = fast\n");
    CHECK_THROWS_AS(parse_config(badnum, "num.cfg"), ConfigParseError);
}

TEST_CASE("config: unknown keys and models are rejected") {
    CHECK_THROWS_AS(config_from("regime = standard\nkapa = 1\n"), ValidationError);
    CHECK_THROWS_AS(config_from("regime = standard\n[output]\nmodels = smooth\n"),
                    ValidationError);
    CHECK_THROWS_AS(config_from("regime = standard\na_eps = 0.1\nlambda = 0.3\n"),
                    ValidationError);
}

TEST_CASE("run_scenario: no uptake makes every model agree") {
    RunConfig cfg = config_from(
        "regime = reference\n"
        "a_eps = 0.01\n"
        "kappa = 0\n"
        "[grid]\n"
        "macro_cells = 256\n"
        "ref_nr = 48\n"
        "ref_nz = 48\n"
        "psi_modes = 16\n"
        "[output]\n"
        "models = reference, standard, distinguished\n");
    const ComparisonReport rep = run_scenario(cfg);
    CHECK(rep.norms.at("linf_avg_standard") <= 1e-10);
    CHECK(rep.norms.at("linf_avg_distinguished") <= 1e-10);
    CHECK(rep.norms.at("l2_avg_standard") <= 1e-10);
}

TEST_CASE("run_scenario: ordering flag at a small hair radius") {
    RunConfig cfg = config_from(
        "regime = reference\n"
        "a_eps = 0.001\n"
        "[grid]\n"
        "macro_cells = 512\n"
        "ref_nr = 96\n"
        "ref_nz = 96\n"
        "psi_modes = 16\n"
        "[output]\n"
        "models = reference, standard, distinguished\n");
    const ComparisonReport rep = run_scenario(cfg);
    CHECK(rep.ordering_flags.at("A_under_B_over"));
    CHECK(rep.norms.at("u0_z0_standard") < rep.norms.at("ref_avg_z0"));
    CHECK(rep.norms.at("ref_avg_z0") < rep.norms.at("u0_z0_distinguished"));
}

TEST_CASE("run_scenario is deterministic") {
    RunConfig cfg = config_from(
        "regime = distinguished\n"
        "a_eps = 0.01\n"
        "[grid]\n"
        "macro_cells = 128\n"
        "psi_modes = 16\n");
    const ComparisonReport r1 = run_scenario(cfg);
    const ComparisonReport r2 = run_scenario(cfg);
    REQUIRE(r1.profiles.size() == r2.profiles.size());
    for (std::size_t i = 0; i < r1.profiles.size(); ++i)
        CHECK(r1.profiles[i].value == r2.profiles[i].value);
    CHECK(r1.norms == r2.norms);
}

TEST_CASE("emit: reruns are byte-identical, empty reports are headers-only") {
    auto dir = fresh_dir("emit");
    ComparisonReport empty;
    emit_outputs(empty, (dir / "empty").string());
    CHECK(slurp((dir / "empty/profile.csv").string()) == "model,regime,t,z,r_or_diag,value\n");
    CHECK_FALSE(std::filesystem::exists(dir / "empty/convergence.csv"));

    RunConfig cfg = config_from(
        "regime = distinguished\n"
        "a_eps = 0.01\n"
        "[grid]\n"
        "macro_cells = 128\n"
        "psi_modes = 16\n");
    emit_outputs(run_scenario(cfg), (dir / "a").string());
    emit_outputs(run_scenario(cfg), (dir / "b").string());
    CHECK(slurp((dir / "a/profile.csv").string()) == slurp((dir / "b/profile.csv").string()));
    CHECK(slurp((dir / "a/summary.kv").string()) == slurp((dir / "b/summary.kv").string()));
    std::filesystem::remove_all(dir);
}

TEST_CASE("summary.kv: the distinguished sink round-trips at bit precision") {
    auto dir = fresh_dir("kv");
    RunConfig cfg = config_from(
        "regime = distinguished\n"
        "a_eps = 0.01\n"
        "[grid]\n"
        "macro_cells = 128\n"
        "psi_modes = 16\n");
    emit_outputs(run_scenario(cfg), dir.string());
    const std::string kv = slurp((dir / "summary.kv").string());
    double sink_b = 0.0;
    std::stringstream ss(kv);
    std::string line;
    while (std::getline(ss, line))
        if (line.rfind("sink_B=", 0) == 0) sink_b = std::strtod(line.c_str() + 7, nullptr);
    const double expect = sink_coefficient(
        Regime::DistinguishedB, cfg.scenario.kappa, cfg.scenario.D_u,
        lambda_distinguished(cfg.scenario.epsilon, cfg.scenario.a_eps));
    CHECK(sink_b == expect);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep: three blocks, per-value subdirectories, monotone gap flag") {
    auto dir = fresh_dir("sweep");
    RunConfig cfg = config_from(
        "regime = reference\n"
        "[grid]\n"
        "macro_cells = 256\n"
        "ref_nr = 48\n"
        "ref_nz = 48\n"
        "psi_modes = 16\n"
        "[output]\n"
        "models = reference, standard, distinguished\n"
        "[sweep]\n"
        "param = a_eps\n"
        "values = 1e-1, 1e-2, 1e-3\n");
    auto reports = run_sweep(cfg, dir.string());
    REQUIRE(reports.size() == 3);
    const std::string prof = slurp((dir / "profile.csv").string());
    std::size_t blocks = 0, pos = 0;
    while ((pos = prof.find("# sweep a_eps", pos)) != std::string::npos) {
        ++blocks;
        ++pos;
    }
    CHECK(blocks == 3);
    CHECK(std::filesystem::exists(dir / "a_eps=0.1/profile.csv"));
    CHECK(std::filesystem::exists(dir / "a_eps=0.001/summary.kv"));
    const std::string merged = slurp((dir / "summary.kv").string());
    CHECK(merged.find("gap_to_B_monotone=true") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("compare reproduces the stored norms from profiles alone") {
    auto dir = fresh_dir("compare");
    RunConfig cfg = config_from(
        "regime = reference\n"
        "a_eps = 0.01\n"
        "[grid]\n"
        "macro_cells = 256\n"
        "ref_nr = 64\n"
        "ref_nz = 64\n"
        "psi_modes = 16\n"
        "[output]\n"
        "models = reference, standard, distinguished\n"
        "order = 2\n");
    const ComparisonReport rep = run_scenario(cfg);
    emit_outputs(rep, dir.string());
    const auto norms = compare_outputs(dir.string());
    for (const auto& key : {"l2_avg_standard", "l2_avg_distinguished",
                            "l2_slice_z0_recon2_distinguished"}) {
        REQUIRE(norms.count(key) == 1);
        CHECK(norms.at(key) == Catch::Approx(rep.norms.at(key)).epsilon(1e-9));
    }
    CHECK(std::filesystem::exists(dir / "summary_recomputed.kv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("convergence studies hit the design orders") {
    RunConfig cfg = config_from("regime = standard\na_eps = 0.01\n");
    auto macro = convergence_study(cfg, 3, "macro");
    REQUIRE(macro.size() == 3);
    for (std::size_t k = 1; k < macro.size(); ++k) {
        CHECK(macro[k][2] > 1.9);
        CHECK(macro[k][2] < 2.1);
    }
    auto ann = convergence_study(cfg, 3, "annulus");
    for (std::size_t k = 1; k < ann.size(); ++k) {
        CHECK(ann[k][2] > 1.7);
        CHECK(ann[k][2] < 2.3);
    }
    auto tm = convergence_study(cfg, 3, "time");
    for (std::size_t k = 1; k < tm.size(); ++k) {
        CHECK(tm[k][2] > 0.9);
        CHECK(tm[k][2] < 1.1);
    }
    CHECK_THROWS_AS(convergence_study(cfg, 2, "macro"), ValidationError);
    CHECK_THROWS_AS(convergence_study(cfg, 3, "nope"), ValidationError);
}

TEST_CASE("transient MM competition run decays at the root surface") {
    RunConfig cfg = config_from(
        "regime = distinguished\n"
        "a_eps = 0.001\n"
        "uptake = michaelis-menten\n"
        "top_bc = zero-flux\n"
        "mode = transient\n"
        "t_end = 1.0\n"
        "dt = 0.01\n"
        "[grid]\n"
        "macro_cells = 256\n"
        "psi_modes = 16\n");
    cfg.scenario.ensure_valid();
    double prev = 1.0;
    for (int k = 1; k <= 4; ++k) {
        Scenario s = cfg.scenario;
        s.t_end = 0.25 * k;
        const double v = solve_u0(s, 256).values.front();
        CHECK(v < prev);
        prev = v;
    }
}
