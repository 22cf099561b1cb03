#include <cmath>
#include <numbers>
#include <queue>
#include <random>

#include "doctest.h"
#include "fracmove/errors.hpp"
#include "fracmove/grid.hpp"

using namespace fracmove;
using std::numbers::pi;

namespace {

Field random_interior_field(const SpaceGrid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Field f(g);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = g.is_boundary(i) ? 0.0 : nd(rng);
    return f;
}

double interior_max_error(const Field& f, const Field& ref) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f.grid().is_boundary(i)) m = std::max(m, std::abs(f[i] - ref[i]));
    }
    return m;
}

}  // namespace

TEST_CASE("grid geometry") {
    const SpaceGrid g(Axis{0.0, 2.0, 9}, Axis{-1.0, 1.0, 5});
    CHECK(g.dim() == 2);
    CHECK(g.size() == 45);
    CHECK(g.spacing(0) == 0.25);
    CHECK(g.spacing(1) == 0.5);
    CHECK(g.min_extent() == 2.0);
    CHECK(g.point(g.index(8, 4))[0] == 2.0);
    CHECK(g.point(g.index(8, 4))[1] == 1.0);
    CHECK(g.is_boundary(g.index(0, 2)));
    CHECK_FALSE(g.is_boundary(g.index(3, 2)));
    CHECK(g.distance_to_boundary(g.index(2, 2)) == doctest::Approx(0.5));
    double area = 0.0;
    for (double w : g.weights()) area += w;
    CHECK(area == doctest::Approx(4.0).epsilon(1e-14));
    CHECK_THROWS_AS(SpaceGrid(Axis{0.0, 1.0, 4}), ConfigError);
    CHECK_THROWS_AS(SpaceGrid(Axis{1.0, 1.0, 9}), ConfigError);
}

TEST_CASE("laplacian is exact on affine and quadratic functions") {
    const SpaceGrid g = SpaceGrid::unit_square(11);
    const Field affine = Field::sample(g, [](const Point& x) { return 1.0 + 2.0 * x[0] - 3.0 * x[1]; });
    const Field quad = Field::sample(g, [](const Point& x) { return x[0] * x[0]; });
    const Field la = laplacian(affine), lq = laplacian(quad);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.is_boundary(i)) {
            CHECK(la[i] == 0.0);
            continue;
        }
        CHECK(std::abs(la[i]) < 1e-10);
        CHECK(lq[i] == doctest::Approx(2.0).epsilon(1e-10));
    }
}

TEST_CASE("laplacian of sin(pi x) converges at second order") {
    double prev = 0.0;
    for (std::size_t n : {17u, 33u, 65u}) {
        const SpaceGrid g = SpaceGrid::unit_interval(n);
        const Field s = Field::sample(g, [](const Point& x) { return std::sin(pi * x[0]); });
        Field exact = s;
        exact *= -pi * pi;
        const double err = interior_max_error(laplacian(s), exact);
        if (prev > 0.0) CHECK(prev / err > 3.8);
        prev = err;
    }
}

TEST_CASE("dirichlet laplacian ignores boundary values") {
    const SpaceGrid g = SpaceGrid::unit_square(9);
    Field f = random_interior_field(g, 1);
    const Field base = dirichlet_laplacian(f);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.is_boundary(i)) f[i] = 7.0;
    }
    CHECK(dirichlet_laplacian(f).values()[40] == base.values()[40]);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(dirichlet_laplacian(f)[i] == base[i]);
}

TEST_CASE("discrete Green identity is symmetric to round-off") {
    for (const SpaceGrid& g : {SpaceGrid::unit_interval(21), SpaceGrid(Axis{0, 1, 13}, Axis{0, 2, 17})}) {
        const Field u = random_interior_field(g, 2), v = random_interior_field(g, 3);
        const double a = inner_product(laplacian(u), v), b = inner_product(u, laplacian(v));
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        CHECK(inner_product(dirichlet_laplacian(u), u) == doctest::Approx(-dirichlet_energy(u)).epsilon(1e-12));
    }
}

TEST_CASE("gradient examples") {
    const SpaceGrid g = SpaceGrid::unit_square(13);
    const Field c = Field::sample(g, [](const Point&) { return 3.0; });
    for (const Field& comp : gradient(c)) CHECK(comp.max_abs() < 1e-12);
    const Field x = Field::sample(g, [](const Point& p) { return p[0]; });
    const auto gx = gradient(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(gx[0][i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(gx[1][i]) < 1e-12);
    }
}

TEST_CASE("gradient of sin(pi x) sin(pi y) converges at second order") {
    double prev = 0.0;
    for (std::size_t n : {17u, 33u, 65u}) {
        const SpaceGrid g = SpaceGrid::unit_square(n);
        const Field s = Field::sample(g, [](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); });
        const Field dx = Field::sample(g, [](const Point& x) { return pi * std::cos(pi * x[0]) * std::sin(pi * x[1]); });
        const Field dy = Field::sample(g, [](const Point& x) { return pi * std::sin(pi * x[0]) * std::cos(pi * x[1]); });
        const auto gr = gradient(s);
        const double err = std::max((gr[0] - dx).max_abs(), (gr[1] - dy).max_abs());
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }
}

TEST_CASE("masked gradient uses only nodes in the frame") {
    const SpaceGrid g = SpaceGrid::unit_square(21);
    const ObservationMask m(g, 0.2);
    const Field q = Field::sample(g, [](const Point& x) { return x[0] * x[0] + x[0] * x[1]; });
    Field polluted = q;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!m.contains(i)) polluted[i] = 1e6;
    }
    const auto a = gradient_in_mask(q, m);
    const auto b = gradient_in_mask(polluted, m);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(a[0][i] == b[0][i]);
        CHECK(a[1][i] == b[1][i]);
        if (!m.contains(i)) {
            CHECK(a[0][i] == 0.0);
            continue;
        }
        const Point x = g.point(i);
        // Second-order stencils are exact on quadratics.
        CHECK(a[0][i] == doctest::Approx(2 * x[0] + x[1]).epsilon(1e-9).scale(1.0));
        CHECK(a[1][i] == doctest::Approx(x[0]).epsilon(1e-9).scale(1.0));
    }
    const Field d = directional_derivative_in_mask(q, {0.5, -1.0}, m);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(d[i] == doctest::Approx(0.5 * a[0][i] - a[1][i]).scale(1.0));
}

TEST_CASE("inner product examples") {
    const SpaceGrid g = SpaceGrid::unit_square(33);
    const Field one = Field::sample(g, [](const Point&) { return 1.0; });
    CHECK(inner_product(one, one) == doctest::Approx(1.0).epsilon(1e-14));
    const SpaceGrid l = SpaceGrid::unit_interval(65);
    const Field s1 = Field::sample(l, [](const Point& x) { return std::sin(pi * x[0]); });
    const Field s2 = Field::sample(l, [](const Point& x) { return std::sin(2 * pi * x[0]); });
    CHECK(std::abs(inner_product(s1, s2)) < 1e-12);
    CHECK(inner_product(s1, s1) == doctest::Approx(0.5).epsilon(1e-12));
    // With an even node count every node lies closer than 0.49 to the boundary.
    const SpaceGrid e = SpaceGrid::unit_square(32);
    const ObservationMask wide(e, 0.49);
    const Field u = random_interior_field(e, 4), v = random_interior_field(e, 5);
    CHECK(inner_product(u, v, &wide) == doctest::Approx(inner_product(u, v)).epsilon(1e-14));
    const Field other(SpaceGrid::unit_square(9));
    CHECK_THROWS_AS(inner_product(one, other), SizeError);
}

TEST_CASE("observation mask is the boundary frame") {
    const SpaceGrid g = SpaceGrid::unit_square(41);
    const double width = 0.15;
    const ObservationMask m(g, width);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(m.contains(i) == (g.distance_to_boundary(i) < width));
        if (g.is_boundary(i)) CHECK(m.contains(i));
        if (m.contains(i)) CHECK(m.weights()[i] == g.weights()[i]);
        else CHECK(m.weights()[i] == 0.0);
    }
    CHECK_THROWS_AS(ObservationMask(g, 0.0), ConfigError);
    CHECK_THROWS_AS(ObservationMask(g, 0.5), ConfigError);
}

TEST_CASE("observation mask is connected") {
    const SpaceGrid g(Axis{0, 1, 25}, Axis{0, 2, 31});
    const ObservationMask m(g, 0.1);
    std::vector<char> seen(g.size(), 0);
    std::queue<std::size_t> todo;
    todo.push(0);
    seen[0] = 1;
    std::size_t reached = 0;
    while (!todo.empty()) {
        const std::size_t i = todo.front();
        todo.pop();
        ++reached;
        const std::size_t ix = g.ix(i), iy = g.iy(i);
        const auto visit = [&](std::size_t jx, std::size_t jy) {
            const std::size_t j = g.index(jx, jy);
            if (m.contains(j) && !seen[j]) {
                seen[j] = 1;
                todo.push(j);
            }
        };
        if (ix > 0) visit(ix - 1, iy);
        if (ix + 1 < g.nx()) visit(ix + 1, iy);
        if (iy > 0) visit(ix, iy - 1);
        if (iy + 1 < g.ny()) visit(ix, iy + 1);
    }
    CHECK(reached == m.count());
}

TEST_CASE("restrict_to_mask zeroes exactly the unobserved nodes") {
    const SpaceGrid g = SpaceGrid::unit_square(21);
    const ObservationMask m(g, 0.25);
    const Field f = Field::sample(g, [](const Point& x) { return 1.0 + x[0] + x[1]; });
    const Field r = restrict_to_mask(f, m);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const bool inner = g.distance_to_boundary(i) >= 0.25;
        CHECK(r[i] == (inner ? 0.0 : f[i]));
    }
    const SpaceGrid e = SpaceGrid::unit_square(32);
    const Field fe = Field::sample(e, [](const Point& x) { return 1.0 + x[0] + x[1]; });
    const Field full = restrict_to_mask(fe, ObservationMask(e, 0.49));
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(full[i] == fe[i]);
    const Field zero = restrict_to_mask(Field(g), m);
    CHECK(zero.max_abs() == 0.0);
}

TEST_CASE("operators are linear") {
    const SpaceGrid g = SpaceGrid::unit_square(15);
    const Field u = random_interior_field(g, 6), v = random_interior_field(g, 7);
    const Field mix = 2.0 * u - 0.5 * v;
    const Field lm = laplacian(mix), lu = laplacian(u), lv = laplacian(v);
    const auto gm = gradient(mix), gu = gradient(u), gv = gradient(v);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(lm[i] == doctest::Approx(2.0 * lu[i] - 0.5 * lv[i]).scale(1e3).epsilon(1e-13));
        CHECK(gm[1][i] == doctest::Approx(2.0 * gu[1][i] - 0.5 * gv[1][i]).scale(10.0).epsilon(1e-13));
    }
}

TEST_CASE("bilinear interpolation reproduces bilinear functions") {
    const SpaceGrid g(Axis{0, 1, 9}, Axis{0, 2, 11});
    const Field f = Field::sample(g, [](const Point& x) { return 1 + 2 * x[0] - x[1] + 3 * x[0] * x[1]; });
    for (Point p : {Point{0.13, 0.71}, Point{0.999, 1.999}, Point{0.5, 1.0}}) {
        CHECK(interpolate(f, p) == doctest::Approx(1 + 2 * p[0] - p[1] + 3 * p[0] * p[1]).epsilon(1e-12));
    }
    CHECK(interpolate(f, Point{1.5, 0.5}) == 0.0);
}
