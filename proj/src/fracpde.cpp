#include "fracmove/fracpde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracmove/errors.hpp"
#include "fracmove/kernels.hpp"

namespace fracmove {

SpaceTimeField::SpaceTimeField(const TimeGrid& tgrid, const SpaceGrid& sgrid)
    : tgrid_(tgrid), slices_(tgrid.n_nodes(), Field(sgrid)) {}

SpaceTimeField::SpaceTimeField(const TimeGrid& tgrid, std::vector<Field> slices)
    : tgrid_(tgrid), slices_(std::move(slices)) {
    if (slices_.size() != tgrid_.n_nodes()) {
        throw SizeError("SpaceTimeField: expected " + std::to_string(tgrid_.n_nodes()) +
                        " slices, got " + std::to_string(slices_.size()));
    }
    for (const auto& s : slices_) {
        if (!(s.grid() == slices_.front().grid())) {
            throw SizeError("SpaceTimeField: slices live on different grids");
        }
    }
}

TimeSeries SpaceTimeField::series(std::size_t node) const {
    std::vector<double> v(slices_.size());
    for (std::size_t n = 0; n < slices_.size(); ++n) v[n] = slices_[n][node];
    return TimeSeries(tgrid_, std::move(v));
}

void SpaceTimeField::set_series(std::size_t node, const TimeSeries& s) {
    if (s.size() != slices_.size()) throw SizeError("SpaceTimeField::set_series: length mismatch");
    for (std::size_t n = 0; n < slices_.size(); ++n) slices_[n][node] = s[n];
}

namespace {

void check_compatible(const SpaceTimeField& a, const SpaceTimeField& b, const char* where) {
    if (!(a.tgrid() == b.tgrid()) || !(a.sgrid() == b.sgrid())) {
        throw SizeError(std::string(where) + ": space-time grid mismatch");
    }
}

// out_n = scale * sum_{j=1..n} w_{n-j} x_j for every spatial node; out_0 = 0.
SpaceTimeField convolve_slices(const std::vector<double>& w, const std::vector<Field>& x,
                               const TimeGrid& tgrid, double scale) {
    SpaceTimeField out(tgrid, x.front().grid());
    std::vector<double> coeffs;
    std::vector<const double*> rows;
    for (std::size_t n = 1; n < x.size(); ++n) {
        coeffs.clear();
        rows.clear();
        for (std::size_t j = 1; j <= n; ++j) {
            coeffs.push_back(w[n - j]);
            rows.push_back(x[j].values().data());
        }
        auto y = out[n].values();
        kernels::accumulate(y, coeffs, rows);
        if (scale != 1.0) {
            for (auto& v : y) v *= scale;
        }
    }
    return out;
}

}  // namespace

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& o) {
    check_compatible(*this, o, "SpaceTimeField::operator+=");
    for (std::size_t n = 0; n < slices_.size(); ++n) slices_[n] += o.slices_[n];
    return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& o) {
    check_compatible(*this, o, "SpaceTimeField::operator-=");
    for (std::size_t n = 0; n < slices_.size(); ++n) slices_[n] -= o.slices_[n];
    return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double s) {
    for (auto& f : slices_) f *= s;
    return *this;
}

double SpaceTimeField::max_abs() const {
    double m = 0.0;
    for (const auto& f : slices_) m = std::max(m, f.max_abs());
    return m;
}

SpaceTimeField time_reverse(const SpaceTimeField& u) {
    std::vector<Field> s(u.slices().rbegin(), u.slices().rend());
    return SpaceTimeField(u.tgrid(), std::move(s));
}

SpaceTimeField rl_integral_forward(const SpaceTimeField& u, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw DomainError("RL integral: beta must lie in [0, 1], got " + std::to_string(beta));
    }
    if (beta == 0.0) return u;
    const auto w = rl_weights(beta, u.tgrid().step(), u.tgrid().n_steps());
    return convolve_slices(w, u.slices(), u.tgrid(), 1.0);
}

SpaceTimeField rl_integral_backward(const SpaceTimeField& u, double beta) {
    if (beta == 0.0) return u;
    return time_reverse(rl_integral_forward(time_reverse(u), beta));
}

FirstStep stepper_first_step(FracOrder order) {
    return order.alpha() == 2.0 ? FirstStep::CentralGhost : FirstStep::Conservative;
}

SpaceTimeField caputo_forward(const SpaceTimeField& u, FracOrder order, FirstStep rule) {
    const std::size_t nn = u.n_nodes();
    if (nn < static_cast<std::size_t>(order.ceil()) + 2) {
        throw SizeError("caputo_forward: series too short");
    }
    std::vector<Field> e(nn, Field(u.sgrid()));
    for (std::size_t j = 1; j < nn; ++j) {
        e[j] = u[j] - u[j - 1];
        if (order.ceil() == 2) {
            if (j >= 2) {
                e[j] -= u[j - 1] - u[j - 2];
            } else {
                e[j] *= first_step_factor(rule);
            }
        }
    }
    const FracScheme scheme(order, u.tgrid());
    return convolve_slices(scheme.weights, e, u.tgrid(), scheme.inv_step_pow);
}

double spacetime_inner(const SpaceTimeField& a, const SpaceTimeField& b, const ObservationMask* mask) {
    check_compatible(a, b, "spacetime_inner");
    double s = 0.0;
    for (std::size_t n = 1; n < a.n_nodes(); ++n) s += inner_product(a[n], b[n], mask);
    return a.tgrid().step() * s;
}

namespace {

Field boundary_part(const Field& f) {
    Field out(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.grid().is_boundary(i)) out[i] = f[i];
    }
    return out;
}

void check_problem(const EvolutionProblem& p) {
    const auto check_field = [&](const std::optional<Field>& f, const char* what) {
        if (f && !(f->grid() == p.sgrid)) {
            throw SizeError(std::string("EvolutionProblem: ") + what + " lives on another grid");
        }
    };
    const auto check_stf = [&](const std::optional<SpaceTimeField>& f, const char* what) {
        if (f && (!(f->sgrid() == p.sgrid) || !(f->tgrid() == p.tgrid))) {
            throw SizeError(std::string("EvolutionProblem: ") + what + " lives on another grid");
        }
    };
    check_field(p.initial_value, "initial value");
    check_field(p.initial_velocity, "initial velocity");
    check_stf(p.boundary, "boundary trace");
    check_stf(p.source, "source");
    if (p.initial_value && p.boundary) {
        const Field& u0 = *p.initial_value;
        const Field& b0 = (*p.boundary)[0];
        const double scale = 1.0 + std::max(u0.max_abs(), b0.max_abs());
        for (std::size_t i = 0; i < u0.size(); ++i) {
            if (p.sgrid.is_boundary(i) && std::abs(u0[i] - b0[i]) > 1e-8 * scale) {
                throw DomainError("EvolutionProblem: initial value violates the boundary trace at node " +
                                  std::to_string(i));
            }
        }
    }
}

}  // namespace

SpaceTimeField solve_forward(const EvolutionProblem& p) {
    check_problem(p);
    const SpaceGrid& g = p.sgrid;
    const std::size_t nn = p.tgrid.n_nodes();
    const int m = p.order.ceil();
    const double tau = p.tgrid.step();
    const FracScheme scheme(p.order, p.tgrid);
    const double c0 = scheme.leading();
    const bool has_history = p.order.integral_order() != 0.0;

    SpaceTimeField v(p.tgrid, g);
    if (p.initial_value) v[0] = *p.initial_value;
    if (p.boundary) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.is_boundary(i)) v[0][i] = (*p.boundary)[0][i];
        }
    }
    // e_j: m-th differences entering the Caputo sum; d_prev: latest first difference.
    std::vector<Field> e(nn, Field(g));
    Field d_prev(g);
    if (m == 2 && p.initial_velocity) {
        d_prev = *p.initial_velocity;
        d_prev *= tau;
    }

    const ShiftedLaplacianSolver solver(g, c0);
    // For m = 2 the first step weighs the new slice with the first-step factor.
    const double k1 = m == 2 ? first_step_factor(stepper_first_step(p.order)) : 1.0;
    std::optional<ShiftedLaplacianSolver> first_solver;
    if (k1 != 1.0) first_solver.emplace(g, k1 * c0);
    std::vector<double> coeffs;
    std::vector<const double*> rows;
    Field history(g);
    for (std::size_t n = 1; n < nn; ++n) {
        Field rhs(g);
        if (p.source) rhs = (*p.source)[n];
        // c0 times the predictor v_{n-1} (+ d_{n-1} when m = 2).
        const double c_n = n == 1 ? k1 * c0 : c0;
        rhs.axpy(c_n, v[n - 1]);
        if (m == 2) rhs.axpy(c_n, d_prev);
        if (has_history && n >= 2) {
            coeffs.clear();
            rows.clear();
            for (std::size_t j = 1; j < n; ++j) {
                coeffs.push_back(scheme.weights[n - j]);
                rows.push_back(e[j].values().data());
            }
            history = Field(g);
            kernels::accumulate(history.values(), coeffs, rows);
            rhs.axpy(-scheme.inv_step_pow, history);
        }
        Field bnd(g);
        if (p.boundary) {
            bnd = boundary_part((*p.boundary)[n]);
            rhs += laplacian(bnd);
        }
        Field vn = (n == 1 && first_solver) ? first_solver->solve(rhs) : solver.solve(rhs);
        if (p.boundary) vn += bnd;
        v[n] = std::move(vn);

        Field d = v[n] - v[n - 1];
        if (m == 1) {
            e[n] = d;
        } else {
            e[n] = d - d_prev;
            if (n == 1) e[n] *= k1;
            d_prev = std::move(d);
        }
    }
    for (std::size_t n = 0; n < nn; ++n) {
        for (double x : v[n].values()) {
            if (!std::isfinite(x)) {
                throw SolverError("solve_forward: non-finite value at time node " + std::to_string(n));
            }
        }
    }
    return v;
}

InitialDataGradient stepper_transpose_gradient(FracOrder order, const SpaceTimeField& weights) {
    const TimeGrid& tg = weights.tgrid();
    const SpaceGrid& g = weights.sgrid();
    const std::size_t nn = tg.n_nodes();
    if (nn < static_cast<std::size_t>(order.ceil()) + 2) throw SizeError("stepper_transpose_gradient: too few steps");
    const int m = order.ceil();
    const FracScheme scheme(order, tg);
    const double s = scheme.inv_step_pow;
    const double c0 = scheme.leading();
    const double k1 = m == 2 ? first_step_factor(stepper_first_step(order)) : 1.0;
    const bool has_history = order.integral_order() != 0.0;

    const ShiftedLaplacianSolver solver(g, c0);
    std::optional<ShiftedLaplacianSolver> first_solver;
    if (k1 != 1.0) first_solver.emplace(g, k1 * c0);

    // Forward system: s W e - L v = rhs with e = B v; transposed: s B^T (W^T Y) - L Y = G.
    // Z = W^T Y, Z_n = w_0 Y_n + H_n with H_n = sum_{k > n} w_{k-n} Y_k. Z_{N+1} = Z_{N+2} = 0.
    std::vector<Field> y(nn + 2, Field(g)), z(nn + 2, Field(g));
    std::vector<double> coeffs;
    std::vector<const double*> rows;
    for (std::size_t n = nn - 1; n >= 1; --n) {
        Field h(g);
        if (has_history && n + 1 < nn) {
            coeffs.clear();
            rows.clear();
            for (std::size_t k = n + 1; k < nn; ++k) {
                coeffs.push_back(scheme.weights[k - n]);
                rows.push_back(y[k].values().data());
            }
            kernels::accumulate(h.values(), coeffs, rows);
        }
        const double kn = n == 1 ? k1 : 1.0;
        Field rhs = weights[n];
        rhs.axpy(-s * kn, h);
        if (m == 1) {
            rhs.axpy(s, z[n + 1]);
        } else {
            rhs.axpy(2.0 * s, z[n + 1]);
            rhs.axpy(-s, z[n + 2]);
        }
        y[n] = (n == 1 && first_solver) ? first_solver->solve(rhs) : solver.solve(rhs);
        z[n] = h;
        z[n].axpy(scheme.weights[0], y[n]);
    }
    // v(0) enters e_1 with -1 (m = 1) or -k1 and e_2 with +1 (m = 2); v_t(0) enters e_1 with -k1 tau.
    InitialDataGradient out{Field(g), Field(g)};
    if (m == 1) {
        out.value = z[1];
        out.value *= s;
    } else {
        out.value = z[1];
        out.value *= k1;
        out.value -= z[2];
        out.value *= s;
        out.velocity = z[1];
        out.velocity *= s * k1 * tg.step();
    }
    out.value.zero_boundary();
    out.velocity.zero_boundary();
    return out;
}

SpaceTimeField solve_backward_caputo(const EvolutionProblem& p) {
    EvolutionProblem r(p.order, p.tgrid, p.sgrid);
    r.initial_value = p.initial_value;
    if (p.initial_velocity) {
        Field v = *p.initial_velocity;
        v *= -1.0;
        r.initial_velocity = std::move(v);
    }
    if (p.boundary) r.boundary = time_reverse(*p.boundary);
    if (p.source) r.source = time_reverse(*p.source);
    return time_reverse(solve_forward(r));
}

Field PoissonSolver::solve(const Field& rhs) const {
    Field neg = rhs;
    neg *= -1.0;
    return solver_.solve(neg);
}

Field solve_poisson(const Field& rhs) { return PoissonSolver(rhs.grid()).solve(rhs); }

Field solve_bilaplace(const Field& rhs) { return PoissonSolver(rhs.grid()).solve_bilaplace(rhs); }

}  // namespace fracmove
