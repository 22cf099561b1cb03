#include "fracmove/linsolve.hpp"

#include <cmath>
#include <string>

#include "fracmove/errors.hpp"
#include "fracmove/kernels.hpp"

namespace fracmove {

std::vector<double> thomas_solve(std::span<const double> sub, std::span<const double> diag,
                                 std::span<const double> sup, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (sub.size() != n || sup.size() != n || rhs.size() != n) {
        throw SizeError("thomas_solve: inconsistent diagonal lengths");
    }
    if (n == 0) return {};
    std::vector<double> c(n), x(n);
    double piv = diag[0];
    if (piv == 0.0) throw SolverError("thomas_solve: zero pivot at row 0");
    c[0] = sup[0] / piv;
    x[0] = rhs[0] / piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = diag[i] - sub[i] * c[i - 1];
        if (piv == 0.0 || !std::isfinite(piv)) {
            throw SolverError("thomas_solve: singular pivot at row " + std::to_string(i));
        }
        c[i] = sup[i] / piv;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
}

namespace {
constexpr double kBandWorkLimit = 5e8;
}

ShiftedLaplacianSolver::ShiftedLaplacianSolver(const SpaceGrid& grid, double shift)
    : grid_(grid), shift_(shift), method_(Method::Tridiagonal) {
    if (!(shift >= 0.0) || !std::isfinite(shift)) {
        throw SolverError("ShiftedLaplacianSolver: shift must be finite and >= 0");
    }
    ni_ = grid.nx() - 2;
    nj_ = grid.dim() == 2 ? grid.ny() - 2 : 1;
    cx_ = 1.0 / (grid.spacing(0) * grid.spacing(0));
    cy_ = grid.dim() == 2 ? 1.0 / (grid.spacing(1) * grid.spacing(1)) : 0.0;

    if (grid.dim() == 1) {
        tri_c_.assign(ni_, 0.0);
        tri_inv_.assign(ni_, 0.0);
        const double d = shift_ + 2.0 * cx_;
        double prev_c = 0.0;
        for (std::size_t i = 0; i < ni_; ++i) {
            const double piv = d - (i == 0 ? 0.0 : -cx_ * prev_c);
            tri_inv_[i] = 1.0 / piv;
            tri_c_[i] = -cx_ / piv;
            prev_c = tri_c_[i];
        }
        return;
    }
    const double n = static_cast<double>(ni_ * nj_);
    const double b = static_cast<double>(ni_);
    if (n * b * b <= kBandWorkLimit) {
        method_ = Method::BandedCholesky;
        factor_band();
    } else {
        method_ = Method::ConjugateGradient;
    }
}

void ShiftedLaplacianSolver::factor_band() {
    band_ = ni_;
    const std::size_t n = ni_ * nj_;
    const std::size_t w = band_ + 1;
    chol_.assign(n * w, 0.0);
    // A(i, i - k) stored at chol_[i * w + k].
    const double diag = shift_ + 2.0 * cx_ + 2.0 * cy_;
    for (std::size_t i = 0; i < n; ++i) {
        chol_[i * w] = diag;
        if (i % ni_ != 0) chol_[i * w + 1] = -cx_;
        if (i >= ni_) chol_[i * w + band_] = -cy_;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t kmax = std::min(i, band_);
        for (std::size_t k = kmax + 1; k-- > 0;) {
            const std::size_t j = i - k;
            double s = chol_[i * w + k];
            // sum over l in [max(i, j) - band, j) of L(i,l) L(j,l)
            const std::size_t lo = i >= band_ ? i - band_ : 0;
            for (std::size_t l = lo; l < j; ++l) {
                s -= chol_[i * w + (i - l)] * chol_[j * w + (j - l)];
            }
            if (k == 0) {
                if (!(s > 0.0)) {
                    throw SolverError("banded Cholesky: non-positive pivot " + std::to_string(s) +
                                      " at row " + std::to_string(i));
                }
                chol_[i * w] = std::sqrt(s);
            } else {
                chol_[i * w + k] = s / chol_[j * w];
            }
        }
    }
}

void ShiftedLaplacianSolver::solve_band(std::vector<double>& x) const {
    const std::size_t n = x.size();
    const std::size_t w = band_ + 1;
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        const std::size_t kmax = std::min(i, band_);
        for (std::size_t k = 1; k <= kmax; ++k) s -= chol_[i * w + k] * x[i - k];
        x[i] = s / chol_[i * w];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        const std::size_t kmax = std::min(n - 1 - i, band_);
        for (std::size_t k = 1; k <= kmax; ++k) s -= chol_[(i + k) * w + k] * x[i + k];
        x[i] = s / chol_[i * w];
    }
}

void ShiftedLaplacianSolver::solve_tridiagonal(std::vector<double>& x) const {
    const std::size_t n = x.size();
    x[0] *= tri_inv_[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] + cx_ * x[i - 1]) * tri_inv_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= tri_c_[i] * x[i + 1];
}

void ShiftedLaplacianSolver::apply(const std::vector<double>& x, std::vector<double>& y) const {
    const double diag = shift_ + 2.0 * cx_ + 2.0 * cy_;
    for (std::size_t j = 0; j < nj_; ++j) {
        for (std::size_t i = 0; i < ni_; ++i) {
            const std::size_t k = j * ni_ + i;
            double s = diag * x[k];
            if (i > 0) s -= cx_ * x[k - 1];
            if (i + 1 < ni_) s -= cx_ * x[k + 1];
            if (j > 0) s -= cy_ * x[k - ni_];
            if (j + 1 < nj_) s -= cy_ * x[k + ni_];
            y[k] = s;
        }
    }
}

void ShiftedLaplacianSolver::solve_cg(const std::vector<double>& b, std::vector<double>& x) const {
    const std::size_t n = b.size();
    x.assign(n, 0.0);
    std::vector<double> r = b, p = b, ap(n);
    const double bnorm2 = kernels::dot(b, b);
    if (bnorm2 == 0.0) return;
    double rr = bnorm2;
    const double tol2 = cg_tolerance * cg_tolerance * bnorm2;
    const std::size_t max_iter = 10 * n + 100;
    for (std::size_t it = 0; it < max_iter; ++it) {
        apply(p, ap);
        const double pap = kernels::dot(p, ap);
        if (!(pap > 0.0)) throw SolverError("conjugate gradient: loss of positive definiteness");
        const double a = rr / pap;
        kernels::axpy(x, a, p);
        kernels::axpy(r, -a, ap);
        const double rr_new = kernels::dot(r, r);
        if (rr_new <= tol2) return;
        const double beta = rr_new / rr;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        rr = rr_new;
    }
    throw SolverError("conjugate gradient: no convergence after " + std::to_string(max_iter) +
                      " iterations (relative residual " + std::to_string(std::sqrt(rr / bnorm2)) +
                      ")");
}

Field ShiftedLaplacianSolver::solve(const Field& rhs) const {
    if (!(rhs.grid() == grid_)) throw SizeError("ShiftedLaplacianSolver: grid mismatch");
    const std::size_t nx = grid_.nx();
    std::vector<double> b(ni_ * nj_);
    const std::size_t j0 = grid_.dim() == 2 ? 1 : 0;
    for (std::size_t j = 0; j < nj_; ++j) {
        for (std::size_t i = 0; i < ni_; ++i) b[j * ni_ + i] = rhs[(j + j0) * nx + i + 1];
    }
    std::vector<double> x;
    switch (method_) {
        case Method::Tridiagonal:
            x = std::move(b);
            solve_tridiagonal(x);
            break;
        case Method::BandedCholesky:
            x = std::move(b);
            solve_band(x);
            break;
        case Method::ConjugateGradient:
            solve_cg(b, x);
            break;
    }
    Field out(grid_);
    for (std::size_t j = 0; j < nj_; ++j) {
        for (std::size_t i = 0; i < ni_; ++i) out[(j + j0) * nx + i + 1] = x[j * ni_ + i];
    }
    for (double v : out.values()) {
        if (!std::isfinite(v)) throw SolverError("ShiftedLaplacianSolver: non-finite solution");
    }
    return out;
}

}  // namespace fracmove
