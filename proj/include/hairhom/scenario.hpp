#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hairhom/errors.hpp"

namespace hairhom {

enum class Regime { StandardA, DistinguishedB, FullReference };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::StandardA: return "standard";
        case Regime::DistinguishedB: return "distinguished";
        case Regime::FullReference: return "reference";
    }
    return "?";
}

/// lambda bookkeeping for the two scale relations.
inline double lambda_standard(double eps, double a_eps) { return eps * std::log(1.0 / a_eps); }
inline double lambda_distinguished(double eps, double a_eps) {
    return eps * eps * std::log(1.0 / a_eps);
}

enum class UptakeKind { Linear, MichaelisMenten, Custom };

/// Surface uptake law g: monotone non-decreasing with g(0) = 0 for the
/// built-in kinds. Custom laws supply g and g'.
class Uptake {
public:
    static Uptake linear() { return Uptake(UptakeKind::Linear); }
    static Uptake michaelis_menten() { return Uptake(UptakeKind::MichaelisMenten); }
    static Uptake custom(std::function<double(double)> g, std::function<double(double)> dg) {
        Uptake u(UptakeKind::Custom);
        u.g_ = std::move(g);
        u.dg_ = std::move(dg);
        return u;
    }

    UptakeKind kind() const { return kind_; }
    bool is_linear() const { return kind_ == UptakeKind::Linear; }

    double value(double u) const {
        switch (kind_) {
            case UptakeKind::Linear: return u;
            case UptakeKind::MichaelisMenten: return u / (1.0 + u);
            case UptakeKind::Custom: return g_(u);
        }
        return 0.0;
    }

    double slope(double u) const {
        switch (kind_) {
            case UptakeKind::Linear: return 1.0;
            case UptakeKind::MichaelisMenten: return 1.0 / ((1.0 + u) * (1.0 + u));
            case UptakeKind::Custom: return dg_(u);
        }
        return 0.0;
    }

    /// g(u)/u with the u -> 0 limit g'(0); used by the frozen-coefficient
    /// Picard iterations.
    double ratio(double u) const {
        if (kind_ == UptakeKind::Linear) return 1.0;
        if (kind_ == UptakeKind::MichaelisMenten) return 1.0 / (1.0 + u);
        if (std::abs(u) < 1e-12) return dg_(0.0);
        return g_(u) / u;
    }

private:
    explicit Uptake(UptakeKind k) : kind_(k) {}
    UptakeKind kind_;
    std::function<double(double)> g_, dg_;
};

inline const char* uptake_name(const Uptake& u) {
    switch (u.kind()) {
        case UptakeKind::Linear: return "linear";
        case UptakeKind::MichaelisMenten: return "michaelis-menten";
        case UptakeKind::Custom: return "custom";
    }
    return "?";
}

enum class TopBc { Dirichlet, ZeroFlux };
enum class RunMode { Steady, Transient };

/// Physical and asymptotic parameters of one problem instance. Boundary data
/// is uniform on each face and the initial condition depends on x3 only, so
/// every admissible Scenario is laterally symmetric by construction; the
/// macroscopic solvers rely on that reduction.
struct Scenario {
    Regime regime = Regime::DistinguishedB;
    double epsilon = 0.5;
    double a_eps = 0.01;   // radius ratio; a_eps == 1 encodes lambda == 0 (macro limits only)
    double L = 0.5;
    double M = 1.0;
    double beta = 0.0;
    double D_u = 1.0;
    double kappa = 1.0;
    Uptake uptake = Uptake::linear();
    TopBc top_bc = TopBc::Dirichlet;
    double top_value = 1.0;
    double u_init = 1.0;
    std::function<double(double)> u_init_profile;  // optional, of x3; must stay in [0, u_max]
    RunMode mode = RunMode::Steady;
    double t_end = 1.0;
    double dt = 0.01;

    double r_eps() const { return epsilon * a_eps; }

    /// lambda under this scenario's own scale relation; the full-reference
    /// regime reports the distinguished-limit value, which is what the
    /// comparison studies need.
    double lambda() const {
        if (regime == Regime::StandardA) return lambda_standard(epsilon, a_eps);
        return lambda_distinguished(epsilon, a_eps);
    }

    double initial_value(double x3) const {
        return u_init_profile ? u_init_profile(x3) : u_init;
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> bad;
        if (!(a_eps > 0.0) || a_eps > 1.0)
            bad.push_back("a_eps must lie in (0,1] (1 only as the lambda=0 limit)");
        if (a_eps == 1.0 && regime == Regime::FullReference)
            bad.push_back("a_eps=1 (lambda=0) is a macroscopic limit; the reference geometry "
                          "needs a_eps < 1");
        if (!(epsilon > 0.0)) bad.push_back("epsilon must be positive");
        if (!(0.0 < L && L < M)) bad.push_back("L and M must satisfy 0 < L < M");
        if (!(beta >= 0.0)) bad.push_back("beta must be non-negative");
        if (!(D_u > 0.0)) bad.push_back("D_u must be positive");
        if (!(kappa >= 0.0)) bad.push_back("kappa must be non-negative");
        if (!u_init_profile && u_init < 0.0) bad.push_back("u_init must be non-negative");
        if (mode == RunMode::Transient) {
            if (!(dt > 0.0)) bad.push_back("dt must be positive");
            if (!(t_end >= dt)) bad.push_back("t_end must be at least dt");
        }
        return bad;
    }

    void ensure_valid() const {
        auto bad = validate();
        if (!bad.empty()) throw ValidationError(bad);
    }

    /// Build a scenario from a given lambda by inverting the scale relation.
    static Scenario from_lambda(Regime regime, double lambda, Scenario base) {
        if (lambda < 0.0) throw ValidationError("lambda must be non-negative");
        base.regime = regime;
        if (regime == Regime::StandardA)
            base.a_eps = std::exp(-lambda / base.epsilon);
        else
            base.a_eps = std::exp(-lambda / (base.epsilon * base.epsilon));
        return base;
    }
    static Scenario from_lambda(Regime regime, double lambda) {
        return from_lambda(regime, lambda, Scenario{});
    }

    Scenario with_regime(Regime r) const {
        Scenario s = *this;
        s.regime = r;
        return s;
    }
};

} // namespace hairhom
