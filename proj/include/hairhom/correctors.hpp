#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hairhom/errors.hpp"
#include "hairhom/scenario.hpp"

namespace hairhom {

/// Annulus boundary-layer corrector w on r in [r_eps, eps*rho]:
///   div(D grad w) = 0,   D dw/dr = (eps^2 kappa / r_eps) w  at r = r_eps,
///   w = 1 at r = eps*rho.
/// Solved in closed form as A ln r + B; both scale relations share the same
/// function of eps^2 ln(1/a_eps), they differ only in how lambda is recorded
/// and in which effective sink the eps -> 0 limit of the boundary flux gives.
struct CorrectorParams {
    double epsilon = 0.5;
    double a_eps = 0.01;
    double rho = 0.25;   // outer radius fraction, 0 < rho < 1/2
    double kappa = 1.0;
    double D_u = 1.0;
    Regime regime = Regime::DistinguishedB;

    double r_eps() const { return epsilon * a_eps; }
    double outer_radius() const { return epsilon * rho; }

    /// lambda under the regime's own scale relation.
    double lambda() const {
        return regime == Regime::StandardA ? lambda_standard(epsilon, a_eps)
                                           : lambda_distinguished(epsilon, a_eps);
    }

    /// The combination entering the closed form: lambda (regime B) or
    /// eps*lambda (regime A); both equal eps^2 ln(1/a_eps).
    double lambda_effective() const {
        return regime == Regime::StandardA ? epsilon * lambda() : lambda();
    }

    void ensure_valid() const {
        std::vector<std::string> bad;
        if (regime == Regime::FullReference)
            bad.push_back("corrector params want regime standard or distinguished");
        if (!(rho > 0.0 && rho < 0.5)) bad.push_back("rho must lie in (0, 1/2)");
        if (!(a_eps > 0.0 && a_eps < 1.0)) bad.push_back("a_eps must lie in (0,1)");
        if (!(epsilon > 0.0)) bad.push_back("epsilon must be positive");
        if (!(kappa > 0.0)) bad.push_back("kappa must be positive");
        if (!(D_u > 0.0)) bad.push_back("D_u must be positive");
        if (!(r_eps() < outer_radius()))
            bad.push_back("hair radius must be smaller than the annulus radius (r_eps < eps*rho)");
        // admissibility of the distinguished-limit denominators
        if (!(lambda_effective() + epsilon * epsilon * std::log(rho) > 0.0))
            bad.push_back("admissibility lambda + eps^2 ln(rho) > 0 violated");
        if (!bad.empty()) throw ValidationError(bad);
    }

    static CorrectorParams from_lambda(Regime regime, double lambda, CorrectorParams base) {
        base.regime = regime;
        if (regime == Regime::StandardA)
            base.a_eps = std::exp(-lambda / base.epsilon);
        else
            base.a_eps = std::exp(-lambda / (base.epsilon * base.epsilon));
        return base;
    }
    static CorrectorParams from_lambda(Regime regime, double lambda) {
        return from_lambda(regime, lambda, CorrectorParams{});
    }
};

namespace detail {

struct WCoefficients {
    double log_coef;  // A in  w = A ln r + B
    double offset;    // B
};

inline double lambda_effective_of(Regime regime, double lambda, double eps) {
    return regime == Regime::StandardA ? eps * lambda : lambda;
}

inline WCoefficients w_coefficients_at(Regime regime, double lambda, double eps, double rho,
                                       double kappa, double D_u) {
    const double e2 = eps * eps;
    const double le = lambda_effective_of(regime, lambda, eps);
    const double den = D_u + kappa * (le + e2 * std::log(rho));
    return {kappa * e2 / den, (D_u + kappa * (le - e2 * std::log(eps))) / den};
}

inline WCoefficients w_coefficients(const CorrectorParams& p) {
    return w_coefficients_at(p.regime, p.lambda(), p.epsilon, p.rho, p.kappa, p.D_u);
}

} // namespace detail

/// Outer-circle flux of the closed form as a function of lambda directly;
/// usable at the lambda = 0 boundary where no admissible a_eps exists.
inline double w_boundary_flux_at_lambda(Regime regime, double lambda, double eps, double rho,
                                        double kappa, double D_u) {
    const double le = detail::lambda_effective_of(regime, lambda, eps);
    return eps * (kappa / rho) / (1.0 + (kappa / D_u) * (le + eps * eps * std::log(rho)));
}

/// Per-unit-cell-area uptake rate, lambda-explicit form.
inline double w_uptake_rate_at_lambda(Regime regime, double lambda, double eps, double rho,
                                      double kappa, double D_u) {
    return 2.0 * std::numbers::pi * rho *
           (w_boundary_flux_at_lambda(regime, lambda, eps, rho, kappa, D_u) / eps);
}

inline double w_closed_form(const CorrectorParams& p, double r) {
    p.ensure_valid();
    if (!(r >= p.r_eps() && r <= p.outer_radius()))
        throw DomainError("w evaluated outside the annulus [r_eps, eps*rho]");
    const auto c = detail::w_coefficients(p);
    return c.log_coef * std::log(r) + c.offset;
}

inline double w_radial_derivative(const CorrectorParams& p, double r) {
    p.ensure_valid();
    if (!(r >= p.r_eps() && r <= p.outer_radius()))
        throw DomainError("w' evaluated outside the annulus [r_eps, eps*rho]");
    return detail::w_coefficients(p).log_coef / r;
}

/// D grad w . n on the outer circle, constant by radial symmetry:
///   eps (kappa/rho) / (1 + (kappa/D)(lambda_eff + eps^2 ln rho)).
inline double w_boundary_flux(const CorrectorParams& p) {
    p.ensure_valid();
    return w_boundary_flux_at_lambda(p.regime, p.lambda(), p.epsilon, p.rho, p.kappa, p.D_u);
}

/// Outer-boundary uptake normalized per unit cell area: the flux divided by
/// eps, integrated over the unit-scale circle of radius rho. Tends to the
/// regime's effective sink coefficient as eps -> 0 with lambda fixed.
inline double w_uptake_rate(const CorrectorParams& p) {
    return 2.0 * std::numbers::pi * p.rho * (w_boundary_flux(p) / p.epsilon);
}

struct CorrectorResiduals {
    double interior;   // relative constancy defect of r w'(r)
    double robin;      // relative defect of D w' = (eps^2 kappa/r_eps) w at r_eps
    double dirichlet;  // |w(eps rho) - 1|
};

/// Residuals of the closed form against its own annulus problem, normalized
/// by the local term magnitudes so "zero to round-off" is meaningful for any
/// parameter scale.
inline CorrectorResiduals corrector_residuals(const CorrectorParams& p,
                                              std::span<const double> sample_radii) {
    p.ensure_valid();
    const auto c = detail::w_coefficients(p);

    double interior = 0.0;
    for (std::size_t i = 0; i + 1 < sample_radii.size(); ++i) {
        const double r1 = sample_radii[i], r2 = sample_radii[i + 1];
        if (!(r1 > p.r_eps() && r2 < p.outer_radius() && r2 > r1))
            throw DomainError("interior residual radii must increase inside the open annulus");
        const double f1 = r1 * w_radial_derivative(p, r1);
        const double f2 = r2 * w_radial_derivative(p, r2);
        const double scale = std::abs(c.log_coef) > 0.0 ? std::abs(c.log_coef) : 1.0;
        interior = std::max(interior, std::abs(f2 - f1) / scale);
    }

    const double re = p.r_eps();
    const double lhs = p.D_u * detail::w_coefficients(p).log_coef / re;
    const double rhs = (p.epsilon * p.epsilon * p.kappa / re) *
                       (c.log_coef * std::log(re) + c.offset);
    const double robin = std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1.0);

    const double outer = c.log_coef * std::log(p.outer_radius()) + c.offset;
    return {interior, robin, std::abs(outer - 1.0)};
}

} // namespace hairhom
