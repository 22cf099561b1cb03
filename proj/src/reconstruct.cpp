#include "fracmove/reconstruct.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "fracmove/errors.hpp"

namespace fracmove {

namespace {
constexpr double kZeroNorm = 1e-14;

void check_positive(const std::optional<double>& v, const char* name) {
    if (v && (!(*v > 0.0) || !std::isfinite(*v))) {
        throw ConfigError(std::string("ReconConfig: ") + name + " must be positive");
    }
}
}  // namespace

void ReconConfig::validate() const {
    check_positive(kappa, "kappa");
    check_positive(kappa1, "kappa1");
    check_positive(kappa2, "kappa2");
    check_positive(m, "m");
    check_positive(m1, "m1");
    check_positive(m2, "m2");
    check_positive(tolerance, "tolerance");
    if (max_iterations < 1) throw ConfigError("ReconConfig: max_iterations must be >= 1");
}

std::string_view recon_solver_name(ReconSolver s) {
    return s == ReconSolver::Thresholding ? "thresholding" : "cg";
}

ReconSolver parse_recon_solver(std::string_view name) {
    if (name == "thresholding") return ReconSolver::Thresholding;
    if (name == "cg") return ReconSolver::ConjugateGradient;
    throw ConfigError("unknown reconstruction solver '" + std::string(name) + "' (expected thresholding or cg)");
}

std::string_view stop_reason_name(StopReason r) {
    return r == StopReason::Tolerance ? "tolerance" : "max_iterations";
}

double relative_l2_error(const Field& x, const Field& truth) {
    const double denom = l2_norm(truth);
    const double num = l2_norm(x - truth);
    return denom > 0.0 ? num / denom : num;
}

double h1_seminorm(const Field& f) { return std::sqrt(dirichlet_energy(f)); }

double h2_norm(const Field& a) {
    const Field la = dirichlet_laplacian(a);
    return std::sqrt(inner_product(la, la) + inner_product(a, a));
}

double default_kappa(const ReconData& data) {
    return 1e-4 * spacetime_inner(data.v_delta, data.v_delta, &data.mask);
}

Field time_derivative_at_start(const SpaceTimeField& z) {
    if (z.n_nodes() < 3) throw SizeError("time_derivative_at_start: need three time nodes");
    Field out = z[1];
    out *= 4.0;
    out.axpy(-3.0, z[0]);
    out.axpy(-1.0, z[2]);
    out *= 1.0 / (2.0 * z.tgrid().step());
    return out;
}

namespace {

void check_data(const ReconData& d) {
    const auto same = [&](const SpaceTimeField& f) { return f.tgrid() == d.tgrid && f.sgrid() == d.sgrid; };
    if (!same(d.v_delta) || !same(d.boundary) || !(d.mask.grid() == d.sgrid)) {
        throw SizeError("ReconData: inconsistent grids");
    }
}

SpaceTimeField masked_residual_source(const ReconData& d, const SpaceTimeField& v) {
    SpaceTimeField r = v - d.v_delta;
    for (std::size_t n = 0; n < r.n_nodes(); ++n) r[n] = restrict_to_mask(r[n], d.mask);
    return rl_integral_backward(r, d.order.integral_order());
}

SpaceTimeField backward_solve(const ReconData& d, const SpaceTimeField& v) {
    EvolutionProblem p(d.order, d.tgrid, d.sgrid);
    p.source = masked_residual_source(d, v);
    return solve_backward_caputo(p);
}

// Gradient of half the data misfit with respect to the initial data, taken
// through the transpose of the discrete stepper so that it is exact for the
// discrete objective.
InitialDataGradient residual_gradient(const ReconData& d, SpaceTimeField w) {
    const double tau = d.tgrid.step();
    for (std::size_t n = 0; n < w.n_nodes(); ++n) {
        w[n] = restrict_to_mask(w[n], d.mask);
        w[n] *= tau;
    }
    return stepper_transpose_gradient(d.order, w);
}

InitialDataGradient misfit_gradient(const ReconData& d, const SpaceTimeField& v) {
    return residual_gradient(d, v - d.v_delta);
}

double data_misfit(const ReconData& d, const SpaceTimeField& v) {
    const SpaceTimeField r = v - d.v_delta;
    return spacetime_inner(r, r, &d.mask);
}

void check_finite(double x, const char* what, std::size_t iter) {
    if (!std::isfinite(x)) {
        std::ostringstream os;
        os << what << " became non-finite at iteration " << iter;
        throw SolverError(os.str());
    }
}

// Change of x relative to x_prev, absolute when the previous norm vanishes.
double guarded_ratio(double change, double prev_norm) {
    return prev_norm < kZeroNorm ? change : change / prev_norm;
}


// Unknowns of a reconstruction: {f} or {a, b}.
using Blocks = std::vector<Field>;

double blocks_inner(const Blocks& x, const Blocks& y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += inner_product(x[k], y[k]);
    return s;
}

void blocks_axpy(Blocks& y, double a, const Blocks& x) {
    for (std::size_t k = 0; k < y.size(); ++k) y[k].axpy(a, x[k]);
}

// Quadratic Tikhonov problem min |F(x) - v^delta|^2_omega + <x, P x> with F affine.
struct QuadraticProblem {
    const ReconData* data;
    std::function<SpaceTimeField(const Blocks&)> forward;  // F(x)
    std::function<Blocks(const InitialDataGradient&)> split;  // data gradient per block
    std::function<Blocks(const Blocks&)> penalty;           // P x
    std::function<Blocks(const Blocks&)> precondition;      // elliptic Riesz map
    std::function<double(std::size_t, const Field&)> change_norm;  // stopping norm of block k, max taken
};

struct CgTrace {
    Blocks x;
    SpaceTimeField v;
    double objective;
    double rel_change;
};

// Preconditioned CG on the normal equations. Calls step(trace) after every
// iterate; stops when step returns false.
void run_cg(const QuadraticProblem& q, Blocks x, std::size_t max_iterations,
            const std::function<bool(const CgTrace&)>& step) {
    const ReconData& d = *q.data;
    SpaceTimeField v = q.forward(x);
    Blocks zero = x;
    for (auto& f : zero) f = Field(d.sgrid);
    const SpaceTimeField v0 = q.forward(zero);

    const auto hessian = [&](const Blocks& p, const SpaceTimeField& ap) {
        Blocks h = q.split(residual_gradient(d, ap));
        blocks_axpy(h, 1.0, q.penalty(p));
        return h;
    };
    Blocks r = q.split(residual_gradient(d, v - d.v_delta));
    blocks_axpy(r, 1.0, q.penalty(x));
    for (auto& f : r) f *= -1.0;
    Blocks z = q.precondition(r);
    Blocks p = z;
    double rz = blocks_inner(r, z);

    for (std::size_t it = 1; it <= max_iterations; ++it) {
        const SpaceTimeField ap = q.forward(p) - v0;
        const Blocks hp = hessian(p, ap);
        const double php = blocks_inner(p, hp);
        if (!(php > 0.0) || !(rz > 0.0)) {
            // Exact solution reached (or curvature lost to round-off): repeat the iterate.
            const Blocks pen = q.penalty(x);
            step(CgTrace{x, v, data_misfit(d, v) + blocks_inner(x, pen), 0.0});
            return;
        }
        const double alpha = rz / php;
        Blocks prev = x;
        blocks_axpy(x, alpha, p);
        SpaceTimeField dv = ap;
        dv *= alpha;
        v += dv;
        blocks_axpy(r, -alpha, hp);

        double rel = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double change = q.change_norm(k, x[k] - prev[k]);
            rel = std::max(rel, guarded_ratio(change, q.change_norm(k, prev[k])));
        }
        const Blocks pen = q.penalty(x);
        if (!step(CgTrace{x, v, data_misfit(d, v) + blocks_inner(x, pen), rel})) return;

        Blocks zn = q.precondition(r);
        const double rzn = blocks_inner(r, zn);
        const double beta = rzn / rz;
        rz = rzn;
        for (std::size_t k = 0; k < p.size(); ++k) {
            p[k] *= beta;
            p[k] += zn[k];
        }
    }
}

}  // namespace

SingleReconstructor::SingleReconstructor(ReconData data, double kappa, double m)
    : data_(std::move(data)), kappa_(kappa), m_(m), poisson_(data_.sgrid) {
    check_data(data_);
    if (!(kappa > 0.0) || !(m > 0.0)) throw ConfigError("SingleReconstructor: kappa and M must be positive");
}

SpaceTimeField SingleReconstructor::forward(const Field& f) const {
    EvolutionProblem p(data_.order, data_.tgrid, data_.sgrid);
    p.boundary = data_.boundary;
    if (data_.order.ceil() == 1) {
        p.initial_value = f;
    } else {
        p.initial_velocity = f;
    }
    return solve_forward(p);
}

double SingleReconstructor::objective(const Field& f, const SpaceTimeField& v) const {
    return data_misfit(data_, v) + kappa_ * dirichlet_energy(f);
}

double SingleReconstructor::objective(const Field& f) const { return objective(f, forward(f)); }

SpaceTimeField SingleReconstructor::adjoint(const SpaceTimeField& v) const { return backward_solve(data_, v); }

Field SingleReconstructor::update_with_z0(const Field& f, const Field& z0) const {
    Field rhs = z0;
    rhs.axpy(m_, dirichlet_laplacian(f));
    rhs *= 1.0 / (m_ + kappa_);
    return poisson_.solve(rhs);
}

Field SingleReconstructor::update(const Field& f, const SpaceTimeField& v) const {
    InitialDataGradient g = misfit_gradient(data_, v);
    return update_with_z0(f, data_.order.ceil() == 1 ? g.value : g.velocity);
}

PairReconstructor::PairReconstructor(ReconData data, double kappa1, double kappa2, double m1, double m2)
    : data_(std::move(data)), kappa1_(kappa1), kappa2_(kappa2), m1_(m1), m2_(m2), poisson_(data_.sgrid) {
    check_data(data_);
    if (data_.order.ceil() != 2) throw ConfigError("pair reconstruction requires alpha > 1");
    if (!(kappa1 > 0.0) || !(kappa2 > 0.0) || !(m1 > 0.0) || !(m2 > 0.0)) {
        throw ConfigError("PairReconstructor: kappa1, kappa2, M1, M2 must be positive");
    }
}

SpaceTimeField PairReconstructor::forward(const Field& a, const Field& b) const {
    EvolutionProblem p(data_.order, data_.tgrid, data_.sgrid);
    p.boundary = data_.boundary;
    p.initial_value = a;
    p.initial_velocity = b;
    return solve_forward(p);
}

double PairReconstructor::objective(const Field& a, const Field& b, const SpaceTimeField& v) const {
    const Field la = dirichlet_laplacian(a);
    return data_misfit(data_, v) + kappa2_ * inner_product(la, la) + kappa1_ * dirichlet_energy(b);
}

double PairReconstructor::objective(const Field& a, const Field& b) const {
    return objective(a, b, forward(a, b));
}

SpaceTimeField PairReconstructor::adjoint(const SpaceTimeField& v) const { return backward_solve(data_, v); }

std::pair<Field, Field> PairReconstructor::update(const Field& a, const Field& b, const SpaceTimeField& v) const {
    // z(0) pairs with b and -dz/dt(0) pairs with a.
    InitialDataGradient g = misfit_gradient(data_, v);
    Field rhs_a = std::move(g.value);
    rhs_a *= -1.0;
    rhs_a.axpy(m2_, dirichlet_laplacian(dirichlet_laplacian(a)));
    rhs_a *= 1.0 / (m2_ + kappa2_);
    Field rhs_b = std::move(g.velocity);
    rhs_b.axpy(m1_, dirichlet_laplacian(b));
    rhs_b *= 1.0 / (m1_ + kappa1_);
    return {poisson_.solve_bilaplace(rhs_a), poisson_.solve(rhs_b)};
}

ReconReport run_single(const ReconConfig& config, const ReconData& data, const std::optional<Field>& truth) {
    config.validate();
    ReconReport rep;
    rep.kappa = config.kappa ? *config.kappa : default_kappa(data);
    if (!(rep.kappa > 0.0)) rep.kappa = 1e-12;
    const SingleReconstructor recon(data, rep.kappa, config.m);

    Field f = config.initial_f ? *config.initial_f : Field(data.sgrid);
    f.zero_boundary();
    SpaceTimeField v = recon.forward(f);
    rep.initial_objective = recon.objective(f, v);
    check_finite(rep.initial_objective, "objective", 0);

    if (config.solver == ReconSolver::ConjugateGradient) {
        const PoissonSolver poisson(data.sgrid);
        const bool value = data.order.ceil() == 1;
        const double kappa = rep.kappa;
        QuadraticProblem q{
            &data,
            [&](const Blocks& x) { return recon.forward(x[0]); },
            [&](const InitialDataGradient& g) { return Blocks{value ? g.value : g.velocity}; },
            [&](const Blocks& x) {
                Field pf = dirichlet_laplacian(x[0]);
                pf *= -kappa;
                return Blocks{std::move(pf)};
            },
            [&](const Blocks& r) {
                Field z = poisson.solve(r[0]);
                z *= -1.0;
                return Blocks{std::move(z)};
            },
            [](std::size_t, const Field& x) { return h1_seminorm(x); }};
        run_cg(q, Blocks{f}, config.max_iterations, [&](const CgTrace& t) {
            IterationRecord rec;
            rec.iter = rep.history.size() + 1;
            rec.objective = t.objective;
            rec.rel_change = t.rel_change;
            check_finite(rec.objective, "objective", rec.iter);
            if (truth) rec.err_l2_vs_truth = relative_l2_error(t.x[0], *truth);
            rep.history.push_back(rec);
            rep.iterates.push_back(t.x[0]);
            if (t.rel_change < config.tolerance) {
                rep.stop_reason = StopReason::Tolerance;
                return false;
            }
            return true;
        });
        return rep;
    }

    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        Field next = recon.update(f, v);
        const double change = h1_seminorm(next - f);
        const double rel = guarded_ratio(change, h1_seminorm(f));
        v = recon.forward(next);
        IterationRecord rec;
        rec.iter = it;
        rec.objective = recon.objective(next, v);
        rec.rel_change = rel;
        check_finite(rec.objective, "objective", it);
        if (truth) rec.err_l2_vs_truth = relative_l2_error(next, *truth);
        rep.history.push_back(rec);
        rep.iterates.push_back(next);
        f = std::move(next);
        if (rel < config.tolerance) {
            rep.stop_reason = StopReason::Tolerance;
            break;
        }
    }
    return rep;
}

namespace {

void record_pair_errors(IterationRecord& rec, const Field& a, const Field& b, const std::optional<Field>& truth_a,
                        const std::optional<Field>& truth_b) {
    if (truth_a) rec.err_a = relative_l2_error(a, *truth_a);
    if (truth_b) rec.err_b = relative_l2_error(b, *truth_b);
    if (truth_a && truth_b) {
        const double num = std::pow(l2_norm(a - *truth_a), 2) + std::pow(l2_norm(b - *truth_b), 2);
        const double den = std::pow(l2_norm(*truth_a), 2) + std::pow(l2_norm(*truth_b), 2);
        rec.err_l2_vs_truth = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
}

}  // namespace

ReconReport run_pair(const ReconConfig& config, const ReconData& data, const std::optional<Field>& truth_a,
                     const std::optional<Field>& truth_b) {
    config.validate();
    ReconReport rep;
    const double kd = default_kappa(data);
    rep.kappa1 = config.kappa1 ? *config.kappa1 : kd;
    rep.kappa2 = config.kappa2 ? *config.kappa2 : kd;
    if (!(rep.kappa1 > 0.0)) rep.kappa1 = 1e-12;
    if (!(rep.kappa2 > 0.0)) rep.kappa2 = 1e-12;
    const PairReconstructor recon(data, rep.kappa1, rep.kappa2, config.m1, config.m2);

    Field a = config.initial_a ? *config.initial_a : Field(data.sgrid);
    Field b = config.initial_b ? *config.initial_b : Field(data.sgrid);
    a.zero_boundary();
    b.zero_boundary();
    SpaceTimeField v = recon.forward(a, b);
    rep.initial_objective = recon.objective(a, b, v);
    check_finite(rep.initial_objective, "objective", 0);

    if (config.solver == ReconSolver::ConjugateGradient) {
        const PoissonSolver poisson(data.sgrid);
        const double k1 = rep.kappa1, k2 = rep.kappa2;
        QuadraticProblem q{
            &data,
            [&](const Blocks& x) { return recon.forward(x[0], x[1]); },
            // -dz/dt(0) pairs with a and z(0) with b.
            [](const InitialDataGradient& g) { return Blocks{g.value, g.velocity}; },
            [&](const Blocks& x) {
                Field pa = dirichlet_laplacian(dirichlet_laplacian(x[0]));
                pa *= k2;
                Field pb = dirichlet_laplacian(x[1]);
                pb *= -k1;
                return Blocks{std::move(pa), std::move(pb)};
            },
            // M1 and M2 weight the blocks as in the thresholding step.
            [&](const Blocks& r) {
                Field za = poisson.solve_bilaplace(r[0]);
                za *= 1.0 / config.m2;
                Field zb = poisson.solve(r[1]);
                zb *= -1.0 / config.m1;
                return Blocks{std::move(za), std::move(zb)};
            },
            // a is measured in H^2 and b in H^1.
            [](std::size_t k, const Field& x) { return k == 0 ? h2_norm(x) : h1_seminorm(x); }};
        run_cg(q, Blocks{a, b}, config.max_iterations, [&](const CgTrace& t) {
            IterationRecord rec;
            rec.iter = rep.history.size() + 1;
            rec.objective = t.objective;
            rec.rel_change = t.rel_change;
            check_finite(rec.objective, "objective", rec.iter);
            record_pair_errors(rec, t.x[0], t.x[1], truth_a, truth_b);
            rep.history.push_back(rec);
            rep.iterates.push_back(t.x[0]);
            rep.iterates_b.push_back(t.x[1]);
            if (t.rel_change < config.tolerance) {
                rep.stop_reason = StopReason::Tolerance;
                return false;
            }
            return true;
        });
        return rep;
    }

    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        auto [na, nb] = recon.update(a, b, v);
        const double ra = guarded_ratio(h2_norm(na - a), h2_norm(a));
        const double rb = guarded_ratio(h1_seminorm(nb - b), h1_seminorm(b));
        v = recon.forward(na, nb);
        IterationRecord rec;
        rec.iter = it;
        rec.objective = recon.objective(na, nb, v);
        rec.rel_change = std::max(ra, rb);
        check_finite(rec.objective, "objective", it);
        record_pair_errors(rec, na, nb, truth_a, truth_b);
        rep.history.push_back(rec);
        rep.iterates.push_back(na);
        rep.iterates_b.push_back(nb);
        a = std::move(na);
        b = std::move(nb);
        if (rec.rel_change < config.tolerance) {
            rep.stop_reason = StopReason::Tolerance;
            break;
        }
    }
    return rep;
}

}  // namespace fracmove
