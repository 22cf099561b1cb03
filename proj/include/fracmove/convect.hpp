#pragma once

// Splitting of the initial pair (a, b) into the profiles (f, g) through the
// convection equation r . grad f = c, c = b - p . grad a, r = q - p.
// Rotated coordinates xi = Q^T x put r along xi_1; along every chord
// (xi_2 fixed) the second-order problem f'' = c' / |r| with zero ends is solved.

#include <optional>
#include <vector>

#include "fracmove/grid.hpp"
#include "fracmove/scenario.hpp"

namespace fracmove {

/// Orthogonal matrix whose first column is r / |r|; row-major dim x dim.
struct Rotation {
    int dim = 0;
    std::vector<double> matrix;

    double operator()(int i, int j) const { return matrix[static_cast<std::size_t>(i * dim + j)]; }
    double determinant() const;  // dim <= 3
    /// Q^T x for the first dim components.
    std::vector<double> to_rotated(std::span<const double> x) const;
};

/// Householder reflection mapping e_1 to r/|r|, last column negated so that
/// det Q = +1 when dim >= 2. In 1D the result is sign(r).
Rotation build_rotation(std::span<const double> r);

struct Chord {
    double xi_perp = 0.0;     // xi_2 (0 in 1D)
    double xi1_left = 0.0;
    double xi1_right = 0.0;
    std::vector<double> xi1;  // sample parameters including both ends
    std::vector<double> c_hat;
    std::vector<double> f_hat;
    bool solved = false;
};

struct ChordSet {
    std::vector<Chord> chords;  // ordered by xi_perp, uniform pitch
    double perp_lo = 0.0;
    double perp_pitch = 0.0;
};

struct ConvectDiagnostics {
    std::size_t chords_total = 0;
    std::size_t chords_solved = 0;
    std::size_t chords_skipped = 0;
    double skipped_area_fraction = 0.0;  // interior nodes touching a skipped chord
};

struct ConvectResult {
    Field f;
    Field g;
    Field c;
    Rotation rotation;
    ChordSet chords;
    ConvectDiagnostics diagnostics;
};

/// c = b - p . grad a = r . grad f for a = f + g, b = q . grad f + p . grad g.
/// Zero on boundary nodes.
Field compute_rhs_c(const Field& a, const Field& b, const MotionSpec& motion);

/// Tridiagonal solve of (f_{i+1} - 2 f_i + f_{i-1}) / ds^2 = (c_{i+1} - c_{i-1}) / (2 ds |r|)
/// with f_0 = f_{n-1} = 0. Requires at least 3 samples.
std::vector<double> chord_bvp_solve(std::span<const double> c_line, double spacing, double r_norm);

/// Chords through the rectangle along r, pitch close to the grid spacing.
/// Lines that only touch a corner are kept to preserve the uniform pitch;
/// they have xi1_left == xi1_right and no samples.
ChordSet build_chords(const SpaceGrid& grid, const Rotation& q);

ConvectResult solve_convection(const Field& a, const Field& b, const MotionSpec& motion);

}  // namespace fracmove
