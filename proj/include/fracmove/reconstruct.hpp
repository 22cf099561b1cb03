#pragma once

// Iterative thresholding reconstruction of a single moving-source profile f
// (any alpha) or of the initial pair (a, b) of the auxiliary problem (alpha > 1).
//
// Each iteration solves the frozen-boundary forward problem for v, obtains z(0)
// and dz/dt(0) from the transpose of the discrete stepper applied to
// chi_omega (v - v^delta) (the discrete form of the backward problem driven by
// chi_omega J_{T-}^(m-alpha)(v - v^delta)), and performs elliptic updates
//   L f+  = (z(0) + M L f) / (M + kappa),
//   L^2 a+ = (z_t(0) + M2 L^2 a) / (M2 + kappa2),
//   L b+  = (z(0) + M1 L b) / (M1 + kappa1),
// with homogeneous Dirichlet data. L is the 5-point Dirichlet Laplacian.

#include <optional>
#include <string>
#include <vector>

#include "fracmove/fracpde.hpp"
#include "fracmove/grid.hpp"

namespace fracmove {

/// Thresholding runs the fixed-point update above. ConjugateGradient solves the
/// same optimality system (the fixed point of that update) by conjugate
/// gradients preconditioned with the same elliptic operators, L for f and b and
/// L^2 for a, scaled by 1/M2 and 1/M1 in pair mode; every iterate is recorded
/// as one iteration.
enum class ReconSolver { Thresholding, ConjugateGradient };
std::string_view recon_solver_name(ReconSolver s);
ReconSolver parse_recon_solver(std::string_view name);

struct ReconConfig {
    // Unset regularization weights default to 1e-4 * ||v^delta||^2.
    std::optional<double> kappa, kappa1, kappa2;
    double m = 1.0, m1 = 1.0, m2 = 1.0;
    double tolerance = 1e-3;
    std::size_t max_iterations = 200;
    ReconSolver solver = ReconSolver::Thresholding;
    std::optional<Field> initial_f, initial_a, initial_b;

    void validate() const;
};

enum class StopReason { Tolerance, MaxIterations };
std::string_view stop_reason_name(StopReason r);

struct IterationRecord {
    std::size_t iter = 0;
    double objective = 0.0;
    double rel_change = 0.0;
    std::optional<double> err_l2_vs_truth;  // single: f; pair: combined (a, b)
    std::optional<double> err_a, err_b;     // pair only
};

struct ReconReport {
    std::vector<Field> iterates;     // single: f_1..f_L; pair: a_1..a_L
    std::vector<Field> iterates_b;   // pair only: b_1..b_L
    double initial_objective = 0.0;
    std::vector<IterationRecord> history;
    StopReason stop_reason = StopReason::MaxIterations;
    double kappa = 0.0, kappa1 = 0.0, kappa2 = 0.0;  // resolved values

    const Field& final_f() const { return iterates.back(); }
    const Field& final_a() const { return iterates.back(); }
    const Field& final_b() const { return iterates_b.back(); }
};

/// Data shared by both schemes: observations on omega and the frozen trace.
struct ReconData {
    FracOrder order;
    TimeGrid tgrid;
    SpaceGrid sgrid;
    ObservationMask mask;
    SpaceTimeField v_delta;
    SpaceTimeField boundary;
};

/// Relative discrete L2 error ||x - truth|| / ||truth|| (absolute when truth is 0).
double relative_l2_error(const Field& x, const Field& truth);

/// H1 seminorm from the edge-difference Dirichlet energy.
double h1_seminorm(const Field& f);
/// sqrt(||L_D a||^2 + ||a||^2).
double h2_norm(const Field& a);

class SingleReconstructor {
public:
    SingleReconstructor(ReconData data, double kappa, double m);

    /// Solves the frozen-boundary forward problem with initial datum f.
    SpaceTimeField forward(const Field& f) const;
    /// Phi(f) = ||v(f) - v^delta||^2 + kappa ||grad f||^2.
    double objective(const Field& f) const;
    double objective(const Field& f, const SpaceTimeField& v) const;
    /// Backward Caputo solution z for the residual v - v^delta. Diagnostic only:
    /// the update uses the exact discrete transpose instead.
    SpaceTimeField adjoint(const SpaceTimeField& v) const;
    /// One thresholding step from f with precomputed v(f).
    Field update(const Field& f, const SpaceTimeField& v) const;
    Field update(const Field& f) const { return update(f, forward(f)); }
    /// Update with z replaced by the given field (z(0) input).
    Field update_with_z0(const Field& f, const Field& z0) const;

    const ReconData& data() const { return data_; }
    double kappa() const { return kappa_; }
    double m() const { return m_; }

private:
    ReconData data_;
    double kappa_, m_;
    PoissonSolver poisson_;
};

class PairReconstructor {
public:
    PairReconstructor(ReconData data, double kappa1, double kappa2, double m1, double m2);

    SpaceTimeField forward(const Field& a, const Field& b) const;
    /// Psi(a, b) = ||v - v^delta||^2 + kappa2 ||L a||^2 + kappa1 ||grad b||^2.
    double objective(const Field& a, const Field& b) const;
    double objective(const Field& a, const Field& b, const SpaceTimeField& v) const;
    SpaceTimeField adjoint(const SpaceTimeField& v) const;
    std::pair<Field, Field> update(const Field& a, const Field& b, const SpaceTimeField& v) const;
    std::pair<Field, Field> update(const Field& a, const Field& b) const { return update(a, b, forward(a, b)); }

    const ReconData& data() const { return data_; }

private:
    ReconData data_;
    double kappa1_, kappa2_, m1_, m2_;
    PoissonSolver poisson_;
};

/// Second-order one-sided time derivative of z at t = 0.
Field time_derivative_at_start(const SpaceTimeField& z);

/// Default regularization weight 1e-4 * ||v^delta||^2_{omega x (0,T)}.
double default_kappa(const ReconData& data);

ReconReport run_single(const ReconConfig& config, const ReconData& data,
                       const std::optional<Field>& truth = std::nullopt);

ReconReport run_pair(const ReconConfig& config, const ReconData& data,
                     const std::optional<Field>& truth_a = std::nullopt,
                     const std::optional<Field>& truth_b = std::nullopt);

}  // namespace fracmove
