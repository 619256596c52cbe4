#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hairhom/banded.hpp"
#include "hairhom/errors.hpp"
#include "hairhom/grid.hpp"

namespace hairhom {

enum class TimeScheme { BackwardEuler };

struct TimeStepper {
    double dt = 0.01;
    double t_end = 1.0;
    TimeScheme scheme = TimeScheme::BackwardEuler;

    std::size_t n_steps() const {
        const double raw = t_end / dt;
        const auto n = static_cast<std::size_t>(std::llround(raw));
        if (std::abs(raw - double(n)) > 1e-9 * raw + 1e-12)
            throw ValidationError("t_end is not an integer multiple of dt");
        return n;
    }

    void check() const {
        std::vector<std::string> bad;
        if (!(dt > 0.0)) bad.push_back("dt must be positive");
        if (!(t_end >= dt)) bad.push_back("t_end must be at least dt");
        if (!bad.empty()) throw ValidationError(bad);
    }
};

/// Semi-discrete conservative form  V du/dt = -(A u) + b,  with Dirichlet
/// constraints re-imposed each step. A carries fluxes, Robin terms and sinks;
/// V is the diagonal of control-volume measures.
struct SemiDiscreteSystem {
    BandedMatrix stiffness;          // A
    std::vector<double> load;        // b
    std::vector<double> volumes;     // V (diagonal)
    std::vector<DirichletRow> dirichlet;
};

/// One implicit Euler step: (V/dt + A) u_next = V/dt u + b.
inline Field step_backward_euler(const SemiDiscreteSystem& sys, const Field& state, double dt) {
    if (!(dt > 0.0)) throw ValidationError("backward Euler step needs dt > 0");
    const std::size_t n = state.values.size();
    if (sys.stiffness.size() != n || sys.volumes.size() != n)
        throw ValidationError("backward Euler: operator and state grids disagree");

    LinearSystem ls;
    ls.matrix = sys.stiffness;
    ls.rhs = sys.load;
    for (std::size_t i = 0; i < n; ++i) {
        ls.matrix.add(i, i, sys.volumes[i] / dt);
        ls.rhs[i] += sys.volumes[i] / dt * state.values[i];
    }
    for (const auto& d : sys.dirichlet) ls.set_dirichlet(d.row, d.value);

    Field out;
    out.grid = state.grid;
    out.values = solve_linear(ls);
    out.time = state.time + dt;
    return out;
}

} // namespace hairhom
