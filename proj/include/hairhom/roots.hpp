#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "hairhom/errors.hpp"

namespace hairhom {

struct RootResult {
    double root;
    double residual;
    int iterations;
};

struct Bracket {
    double lo, hi;  // requires f(lo) <= 0 <= f(hi) or the reverse
};

/// Newton iteration with a bisection safeguard: whenever the Newton step
/// leaves the bracket or the derivative degenerates, bisect instead. The
/// bracket is contracted with every accepted iterate.
inline RootResult newton_scalar(const std::function<double(double)>& f,
                                const std::function<double(double)>& df, double x0, double tol,
                                int max_iter = 100, std::optional<Bracket> bracket = {}) {
    double lo = 0.0, hi = 0.0, flo = 0.0;
    bool have_bracket = bracket.has_value();
    if (have_bracket) {
        lo = bracket->lo;
        hi = bracket->hi;
        flo = f(lo);
        double fhi = f(hi);
        if (flo > fhi) {
            std::swap(lo, hi);
            std::swap(flo, fhi);
        }
        if (!(flo <= 0.0 && fhi >= 0.0))
            throw ValidationError("newton_scalar: bracket does not contain a sign change");
    }

    double x = x0;
    double fx = f(x);
    std::vector<double> history;
    for (int it = 1; it <= max_iter; ++it) {
        if (std::abs(fx) <= tol) return {x, fx, it - 1};
        history.push_back(fx);

        const double d = df(x);
        double x_next;
        bool use_bisect = !(std::isfinite(d)) || d == 0.0;
        if (!use_bisect) x_next = x - fx / d;
        if (have_bracket) {
            if (use_bisect || x_next < std::min(lo, hi) || x_next > std::max(lo, hi))
                x_next = 0.5 * (lo + hi);
        } else if (use_bisect) {
            throw SolverError("newton_scalar: derivative vanished with no bracket", fx, history);
        }

        x = x_next;
        fx = f(x);
        if (have_bracket) {
            if ((fx <= 0.0) == (flo <= 0.0)) {
                lo = x;
                flo = fx;
            } else {
                hi = x;
            }
        }
    }
    if (std::abs(fx) <= tol) return {x, fx, max_iter};
    throw SolverError("newton_scalar failed to converge; last iterate " + std::to_string(x), fx,
                      history);
}

} // namespace hairhom
