#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fracmove/errors.hpp"
#include "fracmove/fraccalc.hpp"

using namespace fracmove;

namespace {

double max_abs_diff(const TimeSeries& a, const TimeSeries& b, std::size_t from = 0) {
    double m = 0.0;
    for (std::size_t k = from; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

// Closed-form values of 1 / Gamma at the half-integers used below.
const double kSqrtPi = std::sqrt(std::numbers::pi);
const double kGamma2_5 = 0.75 * kSqrtPi;

}  // namespace

TEST_CASE("fractional order bookkeeping") {
    FracOrder a(0.3), b(1.0), c(1.4), d(2.0);
    CHECK(a.ceil() == 1);
    CHECK(b.ceil() == 1);
    CHECK(c.ceil() == 2);
    CHECK(d.ceil() == 2);
    CHECK(a.integral_order() == doctest::Approx(0.7));
    CHECK(b.integral_order() == 0.0);
    CHECK(d.integral_order() == 0.0);
    CHECK_THROWS_AS(FracOrder(0.0), DomainError);
    CHECK_THROWS_AS(FracOrder(2.0001), DomainError);
    CHECK_THROWS_AS(FracOrder(NAN), DomainError);
}

TEST_CASE("time grid and series validation") {
    CHECK_THROWS_AS(TimeGrid(0.0, 10), DomainError);
    CHECK_THROWS_AS(TimeGrid(1.0, 1), SizeError);
    const TimeGrid g(2.0, 4);
    CHECK(g.step() == 0.5);
    CHECK(g.node(4) == 2.0);
    CHECK_THROWS_AS(TimeSeries(g, {1.0, 2.0}), SizeError);
}

TEST_CASE("rl_weights telescope to the integral of the kernel") {
    const double beta = 0.35, step = 0.01;
    const auto w = rl_weights(beta, step, 300);
    double sum = 0.0;
    for (double x : w) {
        CHECK(x > 0.0);
        sum += x;
    }
    CHECK(sum == doctest::Approx(std::pow(300 * step, beta) / std::tgamma(beta + 1.0)).epsilon(1e-12));
    for (std::size_t k = 1; k < w.size(); ++k) CHECK(w[k] < w[k - 1]);
    CHECK_THROWS_AS(rl_weights(1.5, step, 3), DomainError);
}

TEST_CASE("J^0 is the identity bit for bit") {
    const TimeGrid g(1.0, 37);
    const auto h = TimeSeries::sample(g, [](double t) { return std::sin(3 * t) + 0.1; });
    CHECK(rl_integral_forward(h, 0.0).values == h.values);
    CHECK(rl_integral_backward(h, 0.0).values == h.values);
}

TEST_CASE("RL integral domain errors") {
    const TimeSeries h(TimeGrid(1.0, 4));
    CHECK_THROWS_AS(rl_integral_forward(h, -0.1), DomainError);
    CHECK_THROWS_AS(rl_integral_forward(h, 1.1), DomainError);
    CHECK_THROWS_AS(rl_integral_backward(h, 2.0), DomainError);
}

TEST_CASE("RL integral of zero is zero") {
    const TimeSeries h(TimeGrid(1.0, 10));
    for (double v : rl_integral_forward(h, 0.4).values) CHECK(v == 0.0);
}

TEST_CASE("J^0.5 t at t = 1 matches Gamma(2)/Gamma(2.5)") {
    const TimeGrid g(1.0, 2000);
    const auto h = TimeSeries::sample(g, [](double t) { return t; });
    const double exact = 1.0 / kGamma2_5;
    CHECK(exact == doctest::Approx(0.75225).epsilon(1e-5));
    CHECK(rl_integral_forward(h, 0.5).values.back() == doctest::Approx(exact).epsilon(2e-3));
}

TEST_CASE("backward integral is the time reversal of the forward one") {
    const TimeGrid g(1.5, 41);
    const auto h = TimeSeries::sample(g, [](double t) { return std::exp(-t) * std::cos(5 * t); });
    for (double beta : {0.2, 0.5, 1.0}) {
        const auto lhs = rl_integral_backward(h, beta);
        const auto rhs = time_reverse(rl_integral_forward(time_reverse(h), beta));
        CHECK(lhs.values == rhs.values);
    }
}

TEST_CASE("backward J^1 of a constant is T - t") {
    const TimeGrid g(1.0, 50);
    const auto one = TimeSeries::sample(g, [](double) { return 1.0; });
    const auto r = rl_integral_backward(one, 1.0);
    for (std::size_t k = 0; k < r.size(); ++k) CHECK(r[k] == doctest::Approx(1.0 - g.node(k)).epsilon(1e-12));
}

TEST_CASE("backward J^0.5 of T - t mirrors the forward power rule") {
    const double T = 1.0;
    const TimeGrid g(T, 2000);
    const auto h = TimeSeries::sample(g, [&](double t) { return T - t; });
    const auto r = rl_integral_backward(h, 0.5);
    for (std::size_t k = 0; k < r.size(); k += 250) {
        const double s = T - g.node(k);
        CHECK(r[k] == doctest::Approx(std::pow(s, 1.5) / kGamma2_5).epsilon(3e-3).scale(1e-3));
    }
}

TEST_CASE("Caputo derivative of a constant vanishes") {
    const TimeGrid g(1.0, 20);
    const auto h = TimeSeries::sample(g, [](double) { return 4.2; });
    for (double a : {0.3, 1.0, 1.6, 2.0}) {
        for (double v : caputo_forward(h, FracOrder(a)).values) CHECK(v == 0.0);
    }
}

TEST_CASE("Caputo at alpha = 1 is the backward difference") {
    const TimeGrid g(1.0, 40);
    const auto h = TimeSeries::sample(g, [](double t) { return t * t; });
    const auto d = caputo_forward(h, FracOrder(1.0));
    CHECK(d[0] == 0.0);
    for (std::size_t n = 1; n < d.size(); ++n) {
        CHECK(d[n] == doctest::Approx((h[n] - h[n - 1]) / g.step()).epsilon(1e-12));
        CHECK(d[n] == doctest::Approx(2.0 * g.node(n) - g.step()).epsilon(1e-10));
    }
}

TEST_CASE("Caputo at alpha = 2 is exact on quadratics with the central ghost") {
    const TimeGrid g(1.0, 30);
    const auto h = TimeSeries::sample(g, [](double t) { return 3.0 * t * t + 2.0 * t; });
    const auto d = caputo_forward(h, FracOrder(2.0), 2.0, FirstStep::CentralGhost);
    for (std::size_t n = 1; n < d.size(); ++n) CHECK(d[n] == doctest::Approx(6.0).epsilon(1e-9));
    // The conservative start halves the first second difference only.
    const auto c = caputo_forward(h, FracOrder(2.0), 2.0, FirstStep::Conservative);
    CHECK(c[1] == doctest::Approx(3.0).epsilon(1e-9));
    for (std::size_t n = 2; n < c.size(); ++n) CHECK(c[n] == doctest::Approx(d[n]).epsilon(1e-12));
    CHECK(first_step_factor(FirstStep::CentralGhost) == 2.0);
    CHECK(first_step_factor(FirstStep::Conservative) == 1.0);
}

TEST_CASE("Caputo power rule at alpha = 0.5 on t^2") {
    const TimeGrid g(1.0, 2000);
    const auto h = TimeSeries::sample(g, [](double t) { return t * t; });
    const auto d = caputo_forward(h, FracOrder(0.5));
    for (std::size_t n = 200; n < d.size(); n += 200) {
        const double t = g.node(n);
        CHECK(d[n] == doctest::Approx(2.0 * std::pow(t, 1.5) / kGamma2_5).epsilon(2e-3));
    }
}

TEST_CASE("J^1 undoes the first-order Caputo difference") {
    const TimeGrid g(1.0, 64);
    const auto h = TimeSeries::sample(g, [](double t) { return std::cos(2 * t); });
    const auto back = rl_integral_forward(caputo_forward(h, FracOrder(1.0)), 1.0);
    for (std::size_t n = 0; n < h.size(); ++n) CHECK(back[n] == doctest::Approx(h[n] - h[0]).scale(1.0).epsilon(1e-13));
}

TEST_CASE("backward RL derivative at alpha = 1 is d/dt from the right") {
    const TimeGrid g(1.0, 25);
    const auto h = TimeSeries::sample(g, [](double t) { return std::sin(t); });
    const auto d = rl_derivative_backward(h, FracOrder(1.0));
    for (std::size_t k = 0; k + 1 < h.size(); ++k) {
        CHECK(d[k] == doctest::Approx((h[k + 1] - h[k]) / g.step()).epsilon(1e-12));
    }
    const TimeSeries zero(g);
    for (double v : rl_derivative_backward(zero, FracOrder(0.7)).values) CHECK(v == 0.0);
}

TEST_CASE("backward RL derivative of (T - t)^2 mirrors the forward power rule") {
    const double T = 1.0;
    const TimeGrid g(T, 2000);
    const auto h = TimeSeries::sample(g, [&](double t) { return (T - t) * (T - t); });
    const auto d = rl_derivative_backward(h, FracOrder(0.5));
    for (std::size_t k = 0; k <= 1600; k += 200) {
        const double s = T - g.node(k);
        CHECK(d[k] == doctest::Approx(-2.0 * std::pow(s, 1.5) / kGamma2_5).epsilon(3e-3));
    }
}

TEST_CASE("time_reverse examples") {
    const TimeGrid g(1.0, 2);
    const TimeSeries h(g, {1.0, 2.0, 3.0});
    CHECK(time_reverse(h).values == std::vector<double>{3.0, 2.0, 1.0});
    const TimeSeries pal(g, {1.0, 5.0, 1.0});
    CHECK(time_reverse(pal).values == pal.values);
    CHECK(time_reverse(time_reverse(h)).values == h.values);
}

TEST_CASE("all operators are linear") {
    const TimeGrid g(1.0, 60);
    const auto h1 = TimeSeries::sample(g, [](double t) { return t * t * t; });
    const auto h2 = TimeSeries::sample(g, [](double t) { return std::sin(4 * t); });
    const double a = 1.7, b = -0.4;
    const auto mix = TimeSeries::sample(g, [&](double t) { return a * t * t * t + b * std::sin(4 * t); });
    const auto check = [&](auto&& op) {
        const auto l = op(mix);
        const auto r1 = op(h1);
        const auto r2 = op(h2);
        for (std::size_t k = 0; k < l.size(); ++k) CHECK(l[k] == doctest::Approx(a * r1[k] + b * r2[k]).scale(1.0).epsilon(1e-12));
    };
    check([](const TimeSeries& h) { return rl_integral_forward(h, 0.3); });
    check([](const TimeSeries& h) { return rl_integral_backward(h, 0.8); });
    check([](const TimeSeries& h) { return caputo_forward(h, FracOrder(0.6)); });
    check([](const TimeSeries& h) { return caputo_forward(h, FracOrder(1.5)); });
    check([](const TimeSeries& h) { return rl_derivative_forward(h, FracOrder(1.2)); });
    check([](const TimeSeries& h) { return rl_derivative_backward(h, FracOrder(0.4)); });
}

TEST_CASE("Caputo and RL derivatives agree for data vanishing at t = 0") {
    const TimeGrid g(1.0, 80);
    const auto h = TimeSeries::sample(g, [](double t) { return t * std::exp(t); });
    const auto c = caputo_forward(h, FracOrder(0.7));
    const auto r = rl_derivative_forward(h, FracOrder(0.7));
    CHECK(max_abs_diff(c, r, 1) < 1e-10);
}
