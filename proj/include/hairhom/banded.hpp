#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hairhom/errors.hpp"

namespace hairhom {

/// Symmetric-bandwidth banded matrix in diagonal storage: entry (i, j) with
/// |i-j| <= band lives at data[(j - i + band) * n + i].
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(std::size_t n, std::size_t band)
        : n_(n), band_(band), data_((2 * band + 1) * n, 0.0) {}

    std::size_t size() const { return n_; }
    std::size_t bandwidth() const { return band_; }

    bool in_band(std::size_t i, std::size_t j) const {
        return (i <= j ? j - i : i - j) <= band_;
    }

    double at(std::size_t i, std::size_t j) const {
        return in_band(i, j) ? data_[slot(i, j)] : 0.0;
    }
    double& ref(std::size_t i, std::size_t j) { return data_[slot(i, j)]; }
    void add(std::size_t i, std::size_t j, double v) { data_[slot(i, j)] += v; }
    void set(std::size_t i, std::size_t j, double v) { data_[slot(i, j)] = v; }

    void zero_row(std::size_t i) {
        const std::size_t jlo = i >= band_ ? i - band_ : 0;
        const std::size_t jhi = std::min(n_ - 1, i + band_);
        for (std::size_t j = jlo; j <= jhi; ++j) data_[slot(i, j)] = 0.0;
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t jlo = i >= band_ ? i - band_ : 0;
            const std::size_t jhi = std::min(n_ - 1, i + band_);
            double s = 0.0;
            for (std::size_t j = jlo; j <= jhi; ++j) s += data_[slot(i, j)] * x[j];
            y[i] = s;
        }
        return y;
    }

    std::size_t storage_values() const { return data_.size(); }

private:
    std::size_t slot(std::size_t i, std::size_t j) const {
        return (j - i + band_) * n_ + i;
    }
    std::size_t n_ = 0, band_ = 0;
    std::vector<double> data_;
};

struct DirichletRow {
    std::size_t row;
    double value;
};

/// Assembled sparse system A x = b. Dirichlet constraints are applied by
/// symmetric elimination so the matrix stays SPD for the iterative path;
/// constrained rows keep a unit diagonal.
struct LinearSystem {
    BandedMatrix matrix;
    std::vector<double> rhs;
    std::vector<DirichletRow> bc_rows;

    std::size_t size() const { return matrix.size(); }

    void set_dirichlet(std::size_t row, double value) {
        const std::size_t n = matrix.size(), band = matrix.bandwidth();
        const std::size_t jlo = row >= band ? row - band : 0;
        const std::size_t jhi = std::min(n - 1, row + band);
        for (std::size_t j = jlo; j <= jhi; ++j) {
            if (j == row) continue;
            rhs[j] -= matrix.at(j, row) * value;
            matrix.set(j, row, 0.0);
            matrix.set(row, j, 0.0);
        }
        matrix.set(row, row, 1.0);
        rhs[row] = value;
        bc_rows.push_back({row, value});
    }
};

struct SolveOptions {
    double rel_tol = 1e-10;               // required ||Ax-b||_inf <= rel_tol*||b||_inf
    std::size_t direct_storage_limit = 24u << 20;  // band-storage values before CG fallback
    std::size_t cg_max_iter = 0;          // 0 -> 40*n
};

struct SolveReport {
    double residual = 0.0;       // achieved ||Ax-b||_inf
    double rhs_norm = 0.0;
    std::size_t iterations = 0;  // 0 for the direct path
    bool used_direct = true;
};

/// LU factorization of a banded matrix without pivoting. Valid for the
/// diagonally dominant M-matrices all assemblers here produce.
class BandedLU {
public:
    explicit BandedLU(const BandedMatrix& a) : n_(a.size()), band_(a.bandwidth()) {
        const std::size_t w = 2 * band_ + 1;
        lu_.assign(w * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t jlo = i >= band_ ? i - band_ : 0;
            const std::size_t jhi = std::min(n_ - 1, i + band_);
            for (std::size_t j = jlo; j <= jhi; ++j) lu_[slot(i, j)] = a.at(i, j);
        }
        for (std::size_t k = 0; k + 1 < n_; ++k) {
            const double piv = lu_[slot(k, k)];
            if (piv == 0.0 || !std::isfinite(piv))
                throw SolverError("banded LU hit a zero pivot at row " + std::to_string(k),
                                  std::numeric_limits<double>::infinity());
            const std::size_t imax = std::min(n_ - 1, k + band_);
            for (std::size_t i = k + 1; i <= imax; ++i) {
                const double m = lu_[slot(i, k)] / piv;
                lu_[slot(i, k)] = m;
                if (m == 0.0) continue;
                const std::size_t jmax = std::min(n_ - 1, k + band_);
                for (std::size_t j = k + 1; j <= jmax; ++j)
                    lu_[slot(i, j)] -= m * lu_[slot(k, j)];
            }
        }
        if (lu_[slot(n_ - 1, n_ - 1)] == 0.0)
            throw SolverError("banded LU: singular matrix (zero last pivot)",
                              std::numeric_limits<double>::infinity());
    }

    std::vector<double> solve(std::span<const double> b) const {
        std::vector<double> x(b.begin(), b.end());
        for (std::size_t i = 1; i < n_; ++i) {
            const std::size_t jlo = i >= band_ ? i - band_ : 0;
            double s = x[i];
            for (std::size_t j = jlo; j < i; ++j) s -= lu_[slot(i, j)] * x[j];
            x[i] = s;
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            const std::size_t jhi = std::min(n_ - 1, ii + band_);
            double s = x[ii];
            for (std::size_t j = ii + 1; j <= jhi; ++j) s -= lu_[slot(ii, j)] * x[j];
            x[ii] = s / lu_[slot(ii, ii)];
        }
        return x;
    }

private:
    std::size_t slot(std::size_t i, std::size_t j) const { return (j - i + band_) * n_ + i; }
    std::size_t n_, band_;
    std::vector<double> lu_;
};

namespace detail {

inline std::vector<double> cg_solve(const BandedMatrix& a, std::span<const double> b,
                                    double tol_abs, std::size_t max_iter, std::size_t& iters) {
    const std::size_t n = a.size();
    std::vector<double> x(n, 0.0), r(b.begin(), b.end()), z(n), p(n);
    std::vector<double> inv_diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a.at(i, i);
        inv_diag[i] = d != 0.0 ? 1.0 / d : 1.0;
    }
    auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
        return s;
    };
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    iters = 0;
    while (iters < max_iter) {
        double rmax = 0.0;
        for (double v : r) rmax = std::max(rmax, std::abs(v));
        if (rmax <= tol_abs) break;
        std::vector<double> ap = a.multiply(p);
        const double alpha = rz / dot(p, ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        ++iters;
    }
    return x;
}

} // namespace detail

/// Direct banded elimination by default; Jacobi-preconditioned CG above the
/// storage threshold. The achieved residual is checked against the declared
/// tolerance on every call.
inline std::vector<double> solve_linear(const LinearSystem& sys, const SolveOptions& opt = {},
                                        SolveReport* report = nullptr) {
    const std::size_t n = sys.size();
    if (n != sys.rhs.size()) throw ValidationError("linear system: matrix/rhs size mismatch");

    double bnorm = 0.0;
    for (double v : sys.rhs) bnorm = std::max(bnorm, std::abs(v));

    std::vector<double> x;
    SolveReport rep;
    if (sys.matrix.storage_values() <= opt.direct_storage_limit) {
        x = BandedLU(sys.matrix).solve(sys.rhs);
        rep.used_direct = true;
    } else {
        const std::size_t max_iter = opt.cg_max_iter ? opt.cg_max_iter : 40 * n;
        x = detail::cg_solve(sys.matrix, sys.rhs, 0.25 * opt.rel_tol * (bnorm > 0 ? bnorm : 1.0),
                             max_iter, rep.iterations);
        rep.used_direct = false;
    }

    std::vector<double> ax = sys.matrix.multiply(x);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(ax[i] - sys.rhs[i]));
    rep.residual = res;
    rep.rhs_norm = bnorm;
    if (report) *report = rep;
    if (res > opt.rel_tol * (bnorm > 0 ? bnorm : 1.0))
        throw SolverError("linear solve missed tolerance " + std::to_string(opt.rel_tol), res);
    return x;
}

} // namespace hairhom
