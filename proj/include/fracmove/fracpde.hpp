#pragma once

// Implicit steppers for (d^alpha_t - Laplacian) v = psi with Dirichlet data,
// and the elliptic solves used by the reconstruction updates.
//
// Discretization: at every node n >= 1 the discrete Caputo derivative of
// fraccalc (L1 on first or second differences) is balanced against the
// 5-point Laplacian of the new slice, so each step solves
//   (c0 I - L_D) v_n = psi_n + c0 * (predictor) - history_n + boundary terms,
// with c0 = w_0 / tau^m. Boundary nodes take the prescribed trace exactly.
// For alpha = 2 the first step uses the central ghost node, so it weighs the
// new slice with 2 c0.
// Backward (terminal-value) problems are time reversals of forward ones.

#include <optional>
#include <vector>

#include "fracmove/fraccalc.hpp"
#include "fracmove/grid.hpp"
#include "fracmove/linsolve.hpp"

namespace fracmove {

class ObservationMask;

/// One Field per time node.
class SpaceTimeField {
public:
    SpaceTimeField(const TimeGrid& tgrid, const SpaceGrid& sgrid);  // zeros
    SpaceTimeField(const TimeGrid& tgrid, std::vector<Field> slices);

    const TimeGrid& tgrid() const { return tgrid_; }
    const SpaceGrid& sgrid() const { return slices_.front().grid(); }
    std::size_t n_nodes() const { return slices_.size(); }
    Field& operator[](std::size_t n) { return slices_[n]; }
    const Field& operator[](std::size_t n) const { return slices_[n]; }
    const std::vector<Field>& slices() const { return slices_; }

    /// Time series of one spatial node.
    TimeSeries series(std::size_t node) const;
    void set_series(std::size_t node, const TimeSeries& s);

    SpaceTimeField& operator+=(const SpaceTimeField& o);
    SpaceTimeField& operator-=(const SpaceTimeField& o);
    SpaceTimeField& operator*=(double s);
    friend SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
    friend SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }

    double max_abs() const;

private:
    TimeGrid tgrid_;
    std::vector<Field> slices_;
};

SpaceTimeField time_reverse(const SpaceTimeField& u);

/// Nodewise forward RL integral J^beta in time (same weights as the scalar operator).
SpaceTimeField rl_integral_forward(const SpaceTimeField& u, double beta);
SpaceTimeField rl_integral_backward(const SpaceTimeField& u, double beta);
/// Nodewise discrete Caputo derivative in time with zero initial slope.
SpaceTimeField caputo_forward(const SpaceTimeField& u, FracOrder order,
                              FirstStep rule = FirstStep::CentralGhost);

/// First-step rule of the stepper: Conservative while the memory term is
/// present (1 < alpha < 2), CentralGhost for the memory-free wave case.
FirstStep stepper_first_step(FracOrder order);

/// Space-time L2 pairing over (mask x (0,T)) with right-endpoint rectangles in
/// time: tau * sum_{n=1..N} <a_n, b_n>.
double spacetime_inner(const SpaceTimeField& a, const SpaceTimeField& b,
                       const ObservationMask* mask = nullptr);

struct EvolutionProblem {
    FracOrder order;
    TimeGrid tgrid;
    SpaceGrid sgrid;
    std::optional<Field> initial_value;     // zero when absent
    std::optional<Field> initial_velocity;  // used only when alpha > 1
    /// Dirichlet trace; only boundary entries are read. Zero when absent.
    std::optional<SpaceTimeField> boundary;
    /// Source psi; zero when absent. Slice 0 is never used.
    std::optional<SpaceTimeField> source;

    EvolutionProblem(FracOrder order, const TimeGrid& tgrid, const SpaceGrid& sgrid)
        : order(order), tgrid(tgrid), sgrid(sgrid) {}
};

SpaceTimeField solve_forward(const EvolutionProblem& problem);

/// Terminal-value problem with the backward Caputo derivative. initial_value and
/// initial_velocity are read as z(T) and dz/dt(T); boundary and source are in
/// the original time orientation. Equals the reversal of a forward solve.
SpaceTimeField solve_backward_caputo(const EvolutionProblem& problem);

/// Sensitivities of sum_n <Y_n, v_n> to the initial data of solve_forward.
struct InitialDataGradient {
    Field value;     // d/d v(0)
    Field velocity;  // d/d v_t(0); zero when alpha <= 1
};

/// Exact transpose of the stepper of solve_forward (homogeneous Dirichlet data)
/// in the weighted grid inner product. Given weights G_n on slices 1..N it
/// returns the gradient of sum_n <G_n, v_n> with respect to v(0) and v_t(0).
/// The recursion runs backward in time and is the discrete counterpart of the
/// Riemann-Liouville backward problem; slice 0 of G is ignored.
InitialDataGradient stepper_transpose_gradient(FracOrder order, const SpaceTimeField& weights);

/// Cached homogeneous-Dirichlet Poisson solver: returns f with L_h f = rhs.
class PoissonSolver {
public:
    explicit PoissonSolver(const SpaceGrid& grid) : solver_(grid, 0.0) {}
    Field solve(const Field& rhs) const;
    /// Split biharmonic: P(P(rhs)).
    Field solve_bilaplace(const Field& rhs) const { return solve(solve(rhs)); }
    const SpaceGrid& grid() const { return solver_.grid(); }

private:
    ShiftedLaplacianSolver solver_;
};

Field solve_poisson(const Field& rhs);
Field solve_bilaplace(const Field& rhs);

}  // namespace fracmove
