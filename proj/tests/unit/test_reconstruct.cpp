#include <cmath>
#include <random>

#include "doctest.h"
#include "fracmove/errors.hpp"
#include "fracmove/experiment.hpp"
#include "fracmove/reconstruct.hpp"

using namespace fracmove;

namespace {

const SpaceGrid kGrid(Axis{0.0, 1.0, 17}, Axis{0.0, 1.0, 17});

Field smooth_field(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    const double a = c(rng), b = c(rng), d = c(rng);
    Field f = Field::sample(kGrid, [&](const Point& x) {
        return a * std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]) + b * std::sin(2 * M_PI * x[0]) * std::sin(M_PI * x[1]) +
               d * x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1]);
    });
    f.zero_boundary();
    return f;
}

// Random observations on the frame with a zero boundary trace.
ReconData masked_noise_data(double alpha, std::uint64_t seed) {
    const TimeGrid tg(0.3, 24);
    const ObservationMask mask(kGrid, 0.25);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    SpaceTimeField v(tg, kGrid);
    for (std::size_t k = 0; k < tg.n_nodes(); ++k) {
        for (std::size_t i = 0; i < kGrid.size(); ++i) v[k][i] = n(rng);
        v[k] = restrict_to_mask(v[k], mask);
    }
    return ReconData{FracOrder(alpha), tg, kGrid, mask, std::move(v), SpaceTimeField(tg, kGrid)};
}

ExperimentConfig desk_config(double alpha) {
    ExperimentConfig c;
    c.alpha = alpha;
    c.t_final = 0.3;
    c.n_steps = 24;
    c.axes = {Axis{0.0, 1.0, 17}, Axis{0.0, 1.0, 17}};
    c.frame_width = 0.25;
    c.motion.p = {0.1, 0.0};
    c.f.width = 0.06;
    return c;
}

struct Desk {
    Simulation sim;
    ReconData data;
};

Desk desk(double alpha) {
    const ExperimentConfig c = desk_config(alpha);
    Simulation sim = simulate(c);
    ReconData data = prepare_data(c, sim.u_noisy, ReconMode::Single);
    return {std::move(sim), std::move(data)};
}

double max_diff(const Field& a, const Field& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("relative error and norms") {
    const Field t = smooth_field(1);
    CHECK(relative_l2_error(t, t) == 0.0);
    CHECK(relative_l2_error(2.0 * t, t) == doctest::Approx(1.0).epsilon(1e-14));
    const Field zero(kGrid);
    CHECK(relative_l2_error(t, zero) == doctest::Approx(l2_norm(t)).epsilon(1e-14));
    CHECK(h1_seminorm(zero) == 0.0);
    CHECK(h2_norm(zero) == 0.0);
    CHECK(h2_norm(t) > l2_norm(t));
    CHECK(h1_seminorm(t) == doctest::Approx(std::sqrt(dirichlet_energy(t))));
}

TEST_CASE("time derivative at t = 0 is exact on quadratics") {
    const TimeGrid tg(0.5, 10);
    const Field shape = smooth_field(2);
    SpaceTimeField z(tg, kGrid);
    for (std::size_t n = 0; n < tg.n_nodes(); ++n) {
        const double t = tg.node(n);
        z[n] = (t * t + 3.0 * t + 1.0) * shape;
    }
    CHECK(max_diff(time_derivative_at_start(z), 3.0 * shape) < 1e-12);
    CHECK_THROWS_AS(time_derivative_at_start(SpaceTimeField(TimeGrid(1.0, 1), kGrid)), SizeError);
}

TEST_CASE("default kappa is 1e-4 times the data energy") {
    const ReconData d = masked_noise_data(0.5, 3);
    CHECK(default_kappa(d) == doctest::Approx(1e-4 * spacetime_inner(d.v_delta, d.v_delta, &d.mask)).epsilon(1e-15));
}

TEST_CASE("reconstruction config validation") {
    ReconConfig c;
    CHECK_NOTHROW(c.validate());
    c.kappa = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ReconConfig{};
    c.tolerance = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ReconConfig{};
    c.max_iterations = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ReconConfig{};
    c.m2 = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_recon_solver("cg") == ReconSolver::ConjugateGradient);
    CHECK(parse_recon_solver("thresholding") == ReconSolver::Thresholding);
    CHECK(recon_solver_name(ReconSolver::ConjugateGradient) == "cg");
    CHECK_THROWS_AS(parse_recon_solver("newton"), ConfigError);
    CHECK_THROWS_AS(SingleReconstructor(masked_noise_data(0.5, 1), 0.0, 1.0), ConfigError);
}

TEST_CASE("objective at zero is the data energy") {
    const ReconData d = masked_noise_data(0.7, 4);
    const SingleReconstructor r(d, 1e-3, 1.0);
    const Field zero(kGrid);
    CHECK(r.forward(zero).max_abs() == 0.0);
    CHECK(r.objective(zero) == doctest::Approx(spacetime_inner(d.v_delta, d.v_delta, &d.mask)).epsilon(1e-14));
    const Field f = smooth_field(5);
    const double misfit = r.objective(f) - 1e-3 * dirichlet_energy(f);
    const SpaceTimeField res = r.forward(f) - d.v_delta;
    CHECK(misfit == doctest::Approx(spacetime_inner(res, res, &d.mask)).epsilon(1e-12));
}

TEST_CASE("zero data from a zero start stays at zero and stops at once") {
    ReconData d = masked_noise_data(0.5, 6);
    d.v_delta = SpaceTimeField(d.tgrid, kGrid);
    ReconConfig c;
    c.kappa = c.kappa1 = c.kappa2 = 1e-6;
    for (ReconSolver s : {ReconSolver::Thresholding, ReconSolver::ConjugateGradient}) {
        c.solver = s;
        const ReconReport rep = run_single(c, d);
        REQUIRE(rep.history.size() == 1);
        CHECK(rep.stop_reason == StopReason::Tolerance);
        CHECK(rep.final_f().max_abs() == 0.0);
        CHECK(rep.history[0].objective == 0.0);
    }
    d.order = FracOrder(1.5);
    c.solver = ReconSolver::Thresholding;
    const ReconReport pr = run_pair(c, d);
    REQUIRE(pr.history.size() == 1);
    CHECK(pr.final_a().max_abs() == 0.0);
    CHECK(pr.final_b().max_abs() == 0.0);
}

TEST_CASE("max_iterations = 1 gives a single history row") {
    const Desk k = desk(0.5);
    ReconConfig c;
    c.max_iterations = 1;
    for (ReconSolver s : {ReconSolver::Thresholding, ReconSolver::ConjugateGradient}) {
        c.solver = s;
        const ReconReport rep = run_single(c, k.data, k.sim.f_truth);
        CHECK(rep.history.size() == 1);
        CHECK(rep.iterates.size() == 1);
        CHECK(rep.history[0].err_l2_vs_truth.has_value());
        CHECK(rep.kappa == doctest::Approx(default_kappa(k.data)));
    }
}

TEST_CASE("with z forced to zero the update contracts by M / (M + kappa)") {
    const SingleReconstructor r(masked_noise_data(0.5, 7), 0.25, 1.5);
    const Field f = smooth_field(8);
    const Field next = r.update_with_z0(f, Field(kGrid));
    const double ratio = l2_norm(dirichlet_laplacian(next)) / l2_norm(dirichlet_laplacian(f));
    CHECK(ratio == doctest::Approx(1.5 / 1.75).epsilon(1e-10));
    CHECK(max_diff(next, (1.5 / 1.75) * f) < 1e-12);
}

TEST_CASE("one single-profile update is linear in (f, v^delta) for a zero trace") {
    for (double alpha : {0.5, 1.5}) {
        ReconData d1 = masked_noise_data(alpha, 10), d2 = masked_noise_data(alpha, 11), d3 = d1;
        const double a = 0.7, b = -1.3;
        d3.v_delta *= a;
        SpaceTimeField s = d2.v_delta;
        s *= b;
        d3.v_delta += s;
        const Field f1 = smooth_field(12), f2 = smooth_field(13);
        const Field u1 = SingleReconstructor(d1, 1e-3, 2.0).update(f1);
        const Field u2 = SingleReconstructor(d2, 1e-3, 2.0).update(f2);
        const Field u3 = SingleReconstructor(d3, 1e-3, 2.0).update(a * f1 + b * f2);
        CHECK(max_diff(u3, a * u1 + b * u2) < 1e-12 * (1.0 + u3.max_abs()));
    }
}

// The objective is quadratic, so the central difference is exact up to
// round-off and checks the update against the true gradient.
TEST_CASE("the single update is a preconditioned gradient step") {
    for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
        CAPTURE(alpha);
        const double kappa = 1e-3, m = 0.7;
        const SingleReconstructor r(masked_noise_data(alpha, 20), kappa, m);
        const Field f = smooth_field(21);
        const Field e = smooth_field(22);
        const double eps = 0.5;
        const double fd = (r.objective(f + eps * e) - r.objective(f - eps * e)) / (4.0 * eps);
        const double pred = (m + kappa) * inner_product(dirichlet_laplacian(r.update(f) - f), e);
        CHECK(pred == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("the pair update is a preconditioned gradient step in each block") {
    for (double alpha : {1.3, 2.0}) {
        CAPTURE(alpha);
        const double k1 = 2e-3, k2 = 5e-4, m1 = 0.6, m2 = 0.9;
        const PairReconstructor r(masked_noise_data(alpha, 30), k1, k2, m1, m2);
        const Field a = smooth_field(31), b = smooth_field(32), e = smooth_field(33);
        const auto [an, bn] = r.update(a, b);
        const double eps = 0.5;
        const double fda = (r.objective(a + eps * e, b) - r.objective(a - eps * e, b)) / (4.0 * eps);
        const double fdb = (r.objective(a, b + eps * e) - r.objective(a, b - eps * e)) / (4.0 * eps);
        const double preda = -(m2 + k2) * inner_product(dirichlet_laplacian(dirichlet_laplacian(an - a)), e);
        const double predb = (m1 + k1) * inner_product(dirichlet_laplacian(bn - b), e);
        CHECK(preda == doctest::Approx(fda).epsilon(1e-8));
        CHECK(predb == doctest::Approx(fdb).epsilon(1e-8));
    }
}

TEST_CASE("the pair update from zero scales with 1 / (M + kappa)") {
    const ReconData d = masked_noise_data(1.5, 40);
    const Field zero(kGrid);
    const auto [a1, b1] = PairReconstructor(d, 1e-3, 2e-3, 1.0, 1.0).update(zero, zero);
    const auto [a2, b2] = PairReconstructor(d, 1e-3, 2e-3, 3.0, 4.0).update(zero, zero);
    CHECK(a1.max_abs() > 0.0);
    CHECK(b1.max_abs() > 0.0);
    CHECK(max_diff((1.0 + 2e-3) * a1, (4.0 + 2e-3) * a2) < 1e-12 * a1.max_abs());
    CHECK(max_diff((1.0 + 1e-3) * b1, (3.0 + 1e-3) * b2) < 1e-12 * b1.max_abs());
}

TEST_CASE("thresholding decreases the objective for M well above kappa") {
    for (double alpha : {0.5, 1.5}) {
        CAPTURE(alpha);
        const Desk k = desk(alpha);
        ReconConfig c;
        c.kappa = 1e-8;
        c.m = 1e-4;
        c.tolerance = 1e-12;
        c.max_iterations = 25;
        const ReconReport rep = run_single(c, k.data, k.sim.f_truth);
        double prev = rep.initial_objective;
        for (const auto& h : rep.history) {
            CHECK(h.objective <= prev + 1e-8 * rep.initial_objective);
            prev = h.objective;
        }
        CHECK(rep.history.back().objective < 0.9 * rep.initial_objective);
    }
}

TEST_CASE("conjugate gradients reach the thresholding fixed point") {
    for (double alpha : {0.5, 1.5}) {
        CAPTURE(alpha);
        const Desk k = desk(alpha);
        ReconConfig c;
        c.kappa = 1e-3 * default_kappa(k.data);
        c.solver = ReconSolver::ConjugateGradient;
        c.tolerance = 1e-12;
        c.max_iterations = 150;
        const ReconReport rep = run_single(c, k.data, k.sim.f_truth);
        double prev = rep.initial_objective;
        for (const auto& h : rep.history) {
            CHECK(h.objective <= prev * (1.0 + 1e-12));
            prev = h.objective;
        }
        const Field& f = rep.final_f();
        const SingleReconstructor r(k.data, *c.kappa, 1.0);
        CHECK(max_diff(r.update(f), f) < 1e-7 * f.max_abs());
        CHECK(rep.history.back().err_l2_vs_truth.value() < rep.history.front().err_l2_vs_truth.value());
    }
}

TEST_CASE("pair conjugate gradients reach the thresholding fixed point") {
    const ReconData d = masked_noise_data(1.5, 50);
    ReconConfig c;
    c.kappa1 = 1e-2;
    c.kappa2 = 1e-3;
    c.solver = ReconSolver::ConjugateGradient;
    c.tolerance = 1e-12;
    c.max_iterations = 200;
    const ReconReport rep = run_pair(c, d);
    const PairReconstructor r(d, *c.kappa1, *c.kappa2, 1.0, 1.0);
    const auto [an, bn] = r.update(rep.final_a(), rep.final_b());
    CHECK(max_diff(an, rep.final_a()) < 1e-7 * rep.final_a().max_abs());
    CHECK(max_diff(bn, rep.final_b()) < 1e-7 * rep.final_b().max_abs());
}

TEST_CASE("a loose tolerance stops before max_iterations") {
    const Desk k = desk(0.5);
    ReconConfig c;
    c.solver = ReconSolver::ConjugateGradient;
    c.tolerance = 0.5;
    c.max_iterations = 50;
    const ReconReport rep = run_single(c, k.data);
    CHECK(rep.stop_reason == StopReason::Tolerance);
    CHECK(rep.history.size() < 50);
    CHECK(rep.history.back().rel_change < 0.5);
    CHECK_FALSE(rep.history.back().err_l2_vs_truth.has_value());
}
