#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hairhom/errors.hpp"
#include "hairhom/scenario.hpp"

namespace hairhom {

enum class ModelKind { Reference, StandardA, DistinguishedB };

inline const char* model_name(ModelKind m) {
    switch (m) {
        case ModelKind::Reference: return "reference";
        case ModelKind::StandardA: return "standard";
        case ModelKind::DistinguishedB: return "distinguished";
    }
    return "?";
}

struct GridOptions {
    std::size_t macro_cells = 1024;
    std::size_t ref_nr = 160;
    std::size_t ref_nz = 160;
    double grading = 1.0;
    double rho = 0.25;       // corrector annulus fraction, recorded in reports
    int psi_modes = 64;
    double ewald_split = 2.0;
};

struct SweepSpec {
    std::string param;             // one of a_eps, epsilon, kappa, beta, D_u
    std::vector<double> values;
    bool active() const { return !param.empty(); }
};

struct RunConfig {
    Scenario scenario;
    GridOptions grids;
    std::vector<ModelKind> models;
    int order = 0;                          // reconstruction order 0..2
    std::vector<double> slices{0.0, 0.75};
    SweepSpec sweep;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

struct RawConfig {
    // section -> key -> (value, line)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> entries;
    std::string name;

    std::optional<std::string> get(const std::string& sec, const std::string& key) const {
        auto s = entries.find(sec);
        if (s == entries.end()) return {};
        auto k = s->second.find(key);
        if (k == s->second.end()) return {};
        return k->second.first;
    }
};

inline RawConfig parse_kv_sections(std::istream& in, const std::string& name) {
    RawConfig raw;
    raw.name = name;
    std::string line, section = "scenario";
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigParseError(name, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigParseError(name, lineno, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError(name, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigParseError(name, lineno, "empty key");
        if (raw.entries[section].count(key))
            throw ConfigParseError(name, lineno, "duplicate key '" + key + "'");
        raw.entries[section][key] = {val, lineno};
    }
    return raw;
}

inline double parse_double(const RawConfig& raw, const std::string& sec, const std::string& key,
                           const std::string& val) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        const int line = raw.entries.at(sec).at(key).second;
        throw ConfigParseError(raw.name, line, "key '" + key + "': not a number: '" + val + "'");
    }
}

inline std::size_t parse_size(const RawConfig& raw, const std::string& sec,
                              const std::string& key, const std::string& val) {
    const double x = parse_double(raw, sec, key, val);
    if (x < 0 || x != std::floor(x)) {
        const int line = raw.entries.at(sec).at(key).second;
        throw ConfigParseError(raw.name, line, "key '" + key + "': expected a whole number");
    }
    return static_cast<std::size_t>(x);
}

} // namespace detail

inline void apply_sweep_value_unchecked(Scenario& s, const std::string& param, double v) {
    if (param == "a_eps")
        s.a_eps = v;
    else if (param == "epsilon")
        s.epsilon = v;
    else if (param == "kappa")
        s.kappa = v;
    else if (param == "beta")
        s.beta = v;
    else if (param == "D_u")
        s.D_u = v;
    else
        throw ValidationError("unsupported sweep parameter '" + param + "'");
}

/// Parse and fully validate a run configuration. Unknown keys, malformed
/// numbers, and every violated invariant are reported together.
inline RunConfig parse_config(std::istream& in, const std::string& name) {
    using detail::RawConfig;
    RawConfig raw = detail::parse_kv_sections(in, name);
    std::vector<std::string> issues;

    static const std::map<std::string, std::vector<std::string>> known = {
        {"scenario",
         {"regime", "epsilon", "a_eps", "lambda", "L", "M", "beta", "D_u", "kappa", "uptake",
          "top_bc", "top_value", "u_init", "mode", "t_end", "dt"}},
        {"grid", {"macro_cells", "ref_nr", "ref_nz", "grading", "rho", "psi_modes",
                  "ewald_split"}},
        {"output", {"slices", "models", "order"}},
        {"sweep", {"param", "values"}},
    };
    for (const auto& [sec, keys] : raw.entries) {
        auto it = known.find(sec);
        if (it == known.end()) {
            issues.push_back("unknown section [" + sec + "]");
            continue;
        }
        for (const auto& [key, val] : keys)
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                issues.push_back("unknown key '" + key + "' in [" + sec + "] (line " +
                                 std::to_string(val.second) + ")");
    }

    RunConfig cfg;
    Scenario& s = cfg.scenario;

    std::optional<Regime> regime;
    if (auto v = raw.get("scenario", "regime")) {
        if (*v == "standard")
            regime = Regime::StandardA;
        else if (*v == "distinguished")
            regime = Regime::DistinguishedB;
        else if (*v == "reference")
            regime = Regime::FullReference;
        else
            issues.push_back("regime must be standard, distinguished or reference (got '" + *v +
                             "')");
    } else {
        issues.push_back("regime is required (standard | distinguished | reference)");
    }
    if (regime) s.regime = *regime;

    auto num = [&](const char* sec, const char* key, double& dst) {
        if (auto v = raw.get(sec, key)) dst = detail::parse_double(raw, sec, key, *v);
    };
    num("scenario", "epsilon", s.epsilon);
    num("scenario", "L", s.L);
    num("scenario", "M", s.M);
    num("scenario", "beta", s.beta);
    num("scenario", "D_u", s.D_u);
    num("scenario", "kappa", s.kappa);
    num("scenario", "top_value", s.top_value);
    num("scenario", "u_init", s.u_init);
    num("scenario", "t_end", s.t_end);
    num("scenario", "dt", s.dt);

    const auto a_eps_given = raw.get("scenario", "a_eps");
    const auto lambda_given = raw.get("scenario", "lambda");
    if (a_eps_given && lambda_given)
        issues.push_back("give either a_eps or lambda, not both");
    if (a_eps_given) s.a_eps = detail::parse_double(raw, "scenario", "a_eps", *a_eps_given);
    if (lambda_given && regime) {
        const double lam = detail::parse_double(raw, "scenario", "lambda", *lambda_given);
        if (lam < 0.0)
            issues.push_back("lambda must be non-negative");
        else
            s = Scenario::from_lambda(*regime, lam, s);
    }

    if (auto v = raw.get("scenario", "uptake")) {
        if (*v == "linear")
            s.uptake = Uptake::linear();
        else if (*v == "michaelis-menten")
            s.uptake = Uptake::michaelis_menten();
        else
            issues.push_back("uptake must be linear or michaelis-menten (got '" + *v + "')");
    }
    if (auto v = raw.get("scenario", "top_bc")) {
        if (*v == "dirichlet")
            s.top_bc = TopBc::Dirichlet;
        else if (*v == "zero-flux")
            s.top_bc = TopBc::ZeroFlux;
        else
            issues.push_back("top_bc must be dirichlet or zero-flux (got '" + *v + "')");
    }
    if (auto v = raw.get("scenario", "mode")) {
        if (*v == "steady")
            s.mode = RunMode::Steady;
        else if (*v == "transient")
            s.mode = RunMode::Transient;
        else
            issues.push_back("mode must be steady or transient (got '" + *v + "')");
    }

    if (auto v = raw.get("grid", "macro_cells"))
        cfg.grids.macro_cells = detail::parse_size(raw, "grid", "macro_cells", *v);
    if (auto v = raw.get("grid", "ref_nr"))
        cfg.grids.ref_nr = detail::parse_size(raw, "grid", "ref_nr", *v);
    if (auto v = raw.get("grid", "ref_nz"))
        cfg.grids.ref_nz = detail::parse_size(raw, "grid", "ref_nz", *v);
    num("grid", "grading", cfg.grids.grading);
    num("grid", "rho", cfg.grids.rho);
    if (auto v = raw.get("grid", "psi_modes"))
        cfg.grids.psi_modes = int(detail::parse_size(raw, "grid", "psi_modes", *v));
    num("grid", "ewald_split", cfg.grids.ewald_split);

    if (auto v = raw.get("output", "order")) {
        const auto o = detail::parse_size(raw, "output", "order", *v);
        if (o > 2)
            issues.push_back("order must be 0, 1 or 2");
        else
            cfg.order = int(o);
    }
    if (auto v = raw.get("output", "slices")) {
        cfg.slices.clear();
        for (const auto& item : detail::split_list(*v))
            cfg.slices.push_back(detail::parse_double(raw, "output", "slices", item));
    }
    if (auto v = raw.get("output", "models")) {
        for (const auto& item : detail::split_list(*v)) {
            if (item == "reference")
                cfg.models.push_back(ModelKind::Reference);
            else if (item == "standard")
                cfg.models.push_back(ModelKind::StandardA);
            else if (item == "distinguished")
                cfg.models.push_back(ModelKind::DistinguishedB);
            else
                issues.push_back("unknown model '" + item + "'");
        }
    }
    if (cfg.models.empty() && regime) {
        switch (*regime) {
            case Regime::StandardA: cfg.models.push_back(ModelKind::StandardA); break;
            case Regime::DistinguishedB: cfg.models.push_back(ModelKind::DistinguishedB); break;
            case Regime::FullReference: cfg.models.push_back(ModelKind::Reference); break;
        }
    }

    if (auto v = raw.get("sweep", "param")) cfg.sweep.param = *v;
    if (auto v = raw.get("sweep", "values"))
        for (const auto& item : detail::split_list(*v))
            cfg.sweep.values.push_back(detail::parse_double(raw, "sweep", "values", item));

    // cross-field validation
    for (const auto& msg : s.validate()) issues.push_back(msg);
    for (double z : cfg.slices)
        if (z < 0.0 || z > s.M)
            issues.push_back("slice z = " + std::to_string(z) + " outside [0, M]");
    if (!(cfg.grids.rho > 0.0 && cfg.grids.rho < 0.5))
        issues.push_back("rho must lie in (0, 1/2)");
    if (cfg.grids.psi_modes < 8) issues.push_back("psi_modes must be at least 8");
    if (cfg.sweep.active()) {
        static const std::vector<std::string> sweepable = {"a_eps", "epsilon", "kappa", "beta",
                                                           "D_u"};
        if (std::find(sweepable.begin(), sweepable.end(), cfg.sweep.param) == sweepable.end())
            issues.push_back("sweep param '" + cfg.sweep.param +
                             "' not supported (a_eps, epsilon, kappa, beta, D_u)");
        if (cfg.sweep.values.empty()) issues.push_back("sweep requires a non-empty values list");
        for (double v : cfg.sweep.values) {
            Scenario probe = s;
            apply_sweep_value_unchecked(probe, cfg.sweep.param, v);
            for (const auto& msg : probe.validate())
                issues.push_back("sweep value " + std::to_string(v) + ": " + msg);
        }
    }

    if (!issues.empty()) throw ValidationError(issues);
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

} // namespace hairhom
