#pragma once

#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "hairhom/errors.hpp"

namespace hairhom {

/// Periodic cell field psi on the unit torus solving  Delta psi = delta - 1,
/// normalized so that 2*pi*psi(y) - ln|y| -> 0 as y -> 0. Spectrally,
/// psi_hat(k) = -1/(4 pi^2 |k|^2) for k != 0 and psi_hat(0) is the cell mean
/// fixed by the normalization.
///
/// A plain Fourier sum converges only algebraically near the logarithmic
/// singularity, so evaluation splits the lattice sum Ewald-style: a
/// short-range sum of screened charges -E1(eta^2 r^2)/(4 pi) plus a smooth
/// Fourier remainder with Gaussian-damped coefficients.
class CellPsi {
public:
    CellPsi(int modes, double ewald_split)
        : modes_(modes), eta_(ewald_split) {
        if (modes < 8) throw ValidationError("cell psi needs modes >= 8");
        if (!(ewald_split > 0.0)) throw ValidationError("ewald_split must be positive");

        // ranges that push both tails below ~1e-17
        real_range_ = 1;
        while (screened(double(real_range_)) > 1e-17 && real_range_ < 64) ++real_range_;
        ++real_range_;
        fourier_range_ = 1;
        while (std::exp(-pi2() * double(fourier_range_ * fourier_range_) / (eta_ * eta_)) >
                   1e-18 &&
               fourier_range_ < modes_)
            ++fourier_range_;
        fourier_range_ = std::min(fourier_range_ + 1, modes_);

        // normalization constant: lim_{y->0} (psi - ln|y|/(2 pi)) = 0
        const double gamma = 0.57721566490153286;
        double fsum = 0.0;
        for (int k1 = -fourier_range_; k1 <= fourier_range_; ++k1)
            for (int k2 = -fourier_range_; k2 <= fourier_range_; ++k2) {
                const int k2n = k1 * k1 + k2 * k2;
                if (k2n == 0) continue;
                fsum += std::exp(-pi2() * double(k2n) / (eta_ * eta_)) /
                        (4.0 * pi2() * double(k2n));
            }
        double rsum = 0.0;
        for (int n1 = -real_range_; n1 <= real_range_; ++n1)
            for (int n2 = -real_range_; n2 <= real_range_; ++n2) {
                const int n2n = n1 * n1 + n2 * n2;
                if (n2n == 0) continue;
                rsum += boost::math::expint(1, eta_ * eta_ * double(n2n));
            }
        c0_ = fsum - (gamma + 2.0 * std::log(eta_)) / (4.0 * std::numbers::pi) +
              rsum / (4.0 * std::numbers::pi);
        mean_ = c0_ - 1.0 / (4.0 * eta_ * eta_);

        tail_estimate_ =
            screened(double(real_range_)) +
            std::exp(-pi2() * double(fourier_range_ * fourier_range_) / (eta_ * eta_)) /
                (4.0 * pi2());
    }

    int modes() const { return modes_; }
    double ewald_split() const { return eta_; }
    double mean() const { return mean_; }
    double splitting_tail_estimate() const { return tail_estimate_; }

    /// psi_hat(k); exact analytic value for every retained mode.
    double fourier_coefficient(int k1, int k2) const {
        const int k2n = k1 * k1 + k2 * k2;
        if (k2n == 0) return mean_;
        return -1.0 / (4.0 * pi2() * double(k2n));
    }

    double evaluate(double y1, double y2) const {
        wrap(y1);
        wrap(y2);
        if (y1 == 0.0 && y2 == 0.0)
            throw DomainError("psi is singular at lattice points");
        double s = 0.0;
        for (int n1 = -real_range_; n1 <= real_range_; ++n1)
            for (int n2 = -real_range_; n2 <= real_range_; ++n2) {
                const double dx = y1 - double(n1), dy = y2 - double(n2);
                s -= boost::math::expint(1, eta_ * eta_ * (dx * dx + dy * dy)) /
                     (4.0 * std::numbers::pi);
            }
        double f = 0.0;
        for (int k1 = -fourier_range_; k1 <= fourier_range_; ++k1)
            for (int k2 = -fourier_range_; k2 <= fourier_range_; ++k2) {
                const int k2n = k1 * k1 + k2 * k2;
                if (k2n == 0) continue;
                f -= std::exp(-pi2() * double(k2n) / (eta_ * eta_)) /
                     (4.0 * pi2() * double(k2n)) *
                     std::cos(2.0 * std::numbers::pi * (k1 * y1 + k2 * y2));
            }
        return s + c0_ + f;
    }

    double circle_average(double radius, int n_samples = 64, double angle_offset = 0.0) const {
        double s = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            const double th = angle_offset + 2.0 * std::numbers::pi * double(i) / n_samples;
            s += evaluate(radius * std::cos(th), radius * std::sin(th));
        }
        return s / double(n_samples);
    }

private:
    static double pi2() { return std::numbers::pi * std::numbers::pi; }
    double screened(double r) const {
        return boost::math::expint(1, eta_ * eta_ * r * r) / (4.0 * std::numbers::pi);
    }
    static void wrap(double& y) {
        y -= std::round(y);
        if (y == -0.5) y = 0.5;
    }

    int modes_;
    double eta_;
    int real_range_ = 4;
    int fourier_range_ = 6;
    double c0_ = 0.0;
    double mean_ = 0.0;
    double tail_estimate_ = 0.0;
};

inline CellPsi build_cell_psi(int modes, double ewald_split = 2.0) {
    return CellPsi(modes, ewald_split);
}

/// Circle-averaged residual of the matching condition 2*pi*psi - ln r at the
/// given radius; decays like -pi r^2 / 2 as r -> 0.
inline double matching_residual(const CellPsi& cell, double radius, int n_samples = 64,
                                double angle_offset = 0.0) {
    if (!(radius > 0.0 && radius < 0.5))
        throw ValidationError("matching_residual needs 0 < radius < 1/2");
    return 2.0 * std::numbers::pi * cell.circle_average(radius, n_samples, angle_offset) -
           std::log(radius);
}

// ---------------------------------------------------------------------------
// Independent route to the cell mean: mollify the delta as a narrow periodic
// Gaussian, solve the 5-point Poisson problem on an n x n torus grid with a
// zero-mean conjugate-gradient iteration, and read the regular part at the
// origin off a circle average. This shares nothing with the Ewald path.
// ---------------------------------------------------------------------------

namespace detail {

inline void torus_laplacian_apply(int n, double h, const std::vector<double>& u,
                                  std::vector<double>& out) {
    const double ih2 = 1.0 / (h * h);
    for (int j = 0; j < n; ++j) {
        const int jm = (j + n - 1) % n, jp = (j + 1) % n;
        for (int i = 0; i < n; ++i) {
            const int im = (i + n - 1) % n, ip = (i + 1) % n;
            out[std::size_t(j) * n + i] =
                (u[std::size_t(j) * n + ip] + u[std::size_t(j) * n + im] +
                 u[std::size_t(jp) * n + i] + u[std::size_t(jm) * n + i] -
                 4.0 * u[std::size_t(j) * n + i]) *
                ih2;
        }
    }
}

inline void project_zero_mean(std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= double(v.size());
    for (double& x : v) x -= m;
}

} // namespace detail

/// Cell mean via the mollified-delta finite-difference route at one grid
/// resolution n (mesh h = 1/n, Gaussian width = mollifier_width_cells * h).
inline double psi_mean_by_finite_difference(int n, double mollifier_width_cells = 4.0,
                                            double sample_radius = 0.25) {
    if (n < 32) throw ValidationError("finite-difference psi mean needs n >= 32");
    const double h = 1.0 / n;
    const double w = mollifier_width_cells * h;

    std::vector<double> rhs(std::size_t(n) * n);
    double mass = 0.0;
    for (int j = 0; j < n; ++j) {
        double y = j * h;
        if (y > 0.5) y -= 1.0;
        for (int i = 0; i < n; ++i) {
            double x = i * h;
            if (x > 0.5) x -= 1.0;
            const double g = std::exp(-(x * x + y * y) / (2.0 * w * w));
            rhs[std::size_t(j) * n + i] = g;
            mass += g;
        }
    }
    const double scale = 1.0 / (mass * h * h);
    for (double& v : rhs) v = v * scale - 1.0;
    detail::project_zero_mean(rhs);  // exact discrete compatibility

    // CG on (-Delta_h) x = -rhs, SPD on the zero-mean subspace
    const std::size_t nn = rhs.size();
    std::vector<double> x(nn, 0.0), r(nn), p(nn), ap(nn);
    for (std::size_t i = 0; i < nn; ++i) r[i] = -rhs[i];
    detail::project_zero_mean(r);
    p = r;
    double rr = 0.0;
    for (std::size_t i = 0; i < nn; ++i) rr += r[i] * r[i];
    const double tol2 = rr * 1e-24;
    const int max_iter = 80 * n;
    int it = 0;
    for (; it < max_iter && rr > tol2; ++it) {
        detail::torus_laplacian_apply(n, h, p, ap);
        for (double& v : ap) v = -v;
        double pap = 0.0;
        for (std::size_t i = 0; i < nn; ++i) pap += p[i] * ap[i];
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < nn; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rr_new = 0.0;
        for (std::size_t i = 0; i < nn; ++i) rr_new += r[i] * r[i];
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < nn; ++i) p[i] = r[i] + beta * p[i];
    }
    if (rr > tol2 * 1e6)
        throw SolverError("finite-difference psi mean: CG stalled", std::sqrt(rr));
    detail::project_zero_mean(x);

    // circle average of the zero-mean solution at sample_radius (bilinear)
    const int m = 256;
    double avg = 0.0;
    for (int s = 0; s < m; ++s) {
        const double th = 2.0 * std::numbers::pi * s / m;
        double px = sample_radius * std::cos(th), py = sample_radius * std::sin(th);
        px -= std::floor(px);
        py -= std::floor(py);
        const double gx = px / h, gy = py / h;
        const int i0 = int(gx) % n, j0 = int(gy) % n;
        const int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
        const double fx = gx - std::floor(gx), fy = gy - std::floor(gy);
        avg += x[std::size_t(j0) * n + i0] * (1 - fx) * (1 - fy) +
               x[std::size_t(j0) * n + i1] * fx * (1 - fy) +
               x[std::size_t(j1) * n + i0] * (1 - fx) * fy +
               x[std::size_t(j1) * n + i1] * fx * fy;
    }
    avg /= m;

    // A(r0) = ln(r0)/(2 pi) + c_zm - r0^2/4 - w^2/2 + O(h^2); mean = -c_zm
    const double c_zm = avg - std::log(sample_radius) / (2.0 * std::numbers::pi) +
                        sample_radius * sample_radius / 4.0 + w * w / 2.0;
    return -c_zm;
}

/// Richardson-extrapolated mean from resolutions n and 2n.
inline double psi_mean_fd_richardson(int n, double mollifier_width_cells = 4.0,
                                     double sample_radius = 0.25) {
    const double c = psi_mean_by_finite_difference(n, mollifier_width_cells, sample_radius);
    const double f = psi_mean_by_finite_difference(2 * n, mollifier_width_cells, sample_radius);
    return (4.0 * f - c) / 3.0;
}

} // namespace hairhom
