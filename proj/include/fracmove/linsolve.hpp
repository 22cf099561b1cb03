#pragma once

// Linear solvers for (shift * I - L_D) x = rhs on the interior nodes of a
// SpaceGrid, where L_D is the Dirichlet Laplacian. The operator is symmetric
// positive definite for shift >= 0.

#include <cstddef>
#include <span>
#include <vector>

#include "fracmove/grid.hpp"

namespace fracmove {

/// Solves a tridiagonal system in place of rhs. sub[0] and sup[n-1] are ignored.
std::vector<double> thomas_solve(std::span<const double> sub, std::span<const double> diag,
                                 std::span<const double> sup, std::span<const double> rhs);

class ShiftedLaplacianSolver {
public:
    enum class Method { Tridiagonal, BandedCholesky, ConjugateGradient };

    ShiftedLaplacianSolver(const SpaceGrid& grid, double shift);

    /// Reads interior entries of rhs; returns the solution with zero boundary entries.
    Field solve(const Field& rhs) const;

    Method method() const { return method_; }
    double shift() const { return shift_; }
    const SpaceGrid& grid() const { return grid_; }

    static constexpr double cg_tolerance = 1e-10;

private:
    void factor_band();
    void solve_band(std::vector<double>& x) const;
    void solve_tridiagonal(std::vector<double>& x) const;
    void solve_cg(const std::vector<double>& b, std::vector<double>& x) const;
    void apply(const std::vector<double>& x, std::vector<double>& y) const;

    SpaceGrid grid_;
    double shift_;
    Method method_;
    std::size_t ni_, nj_;    // interior counts per axis
    double cx_, cy_;         // 1/h^2 per axis (cy_ = 0 in 1D)
    std::size_t band_ = 0;
    std::vector<double> chol_;      // banded lower factor, row-major (band_+1) per row
    std::vector<double> tri_c_;     // modified super-diagonal of the Thomas sweep
    std::vector<double> tri_inv_;   // reciprocal pivots of the Thomas sweep
};

}  // namespace fracmove
