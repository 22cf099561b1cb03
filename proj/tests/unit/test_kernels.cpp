#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "fracmove/fracpde.hpp"
#include "fracmove/kernels.hpp"

using namespace fracmove;
namespace k = fracmove::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<k::Isa> vector_isas() {
    std::vector<k::Isa> out;
    for (k::Isa isa : {k::Isa::Avx2, k::Isa::Neon}) {
        if (k::available(isa)) out.push_back(isa);
    }
    return out;
}

// Restores the runtime selection when a test forces a variant.
struct IsaGuard {
    k::Isa saved = k::active_isa();
    ~IsaGuard() { k::set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar variant is always available and selectable") {
    CHECK(k::available(k::Isa::Scalar));
    IsaGuard guard;
    k::set_active_isa(k::Isa::Scalar);
    CHECK(k::active_isa() == k::Isa::Scalar);
    CHECK(k::isa_name(k::Isa::Scalar) == "scalar");
}

TEST_CASE("unavailable variants are rejected") {
    for (k::Isa isa : {k::Isa::Avx2, k::Isa::Neon}) {
        if (!k::available(isa)) CHECK_THROWS(k::set_active_isa(isa));
    }
}

TEST_CASE("vector kernels are bit-identical to the scalar reference") {
    std::mt19937_64 rng(11);
    const k::KernelTable& ref = k::scalar_table();
    for (k::Isa isa : vector_isas()) {
        const k::KernelTable& vec = k::table(isa);
        CAPTURE(vec.name);
        for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 13u, 31u, 64u, 127u, 1000u}) {
            CAPTURE(n);
            const auto x = random_vector(n, rng);
            const auto y0 = random_vector(n, rng);
            const auto w = random_vector(n, rng);

            auto ya = y0, yb = y0;
            ref.axpy(ya.data(), 0.37, x.data(), n);
            vec.axpy(yb.data(), 0.37, x.data(), n);
            CHECK(bit_equal(ya, yb));

            CHECK(bit_equal(ref.dot(x.data(), y0.data(), n), vec.dot(x.data(), y0.data(), n)));
            CHECK(bit_equal(ref.weighted_dot(x.data(), y0.data(), w.data(), n),
                            vec.weighted_dot(x.data(), y0.data(), w.data(), n)));

            std::vector<std::vector<double>> rows;
            std::vector<const double*> ptrs;
            for (int j = 0; j < 5; ++j) rows.push_back(random_vector(n, rng));
            for (const auto& r : rows) ptrs.push_back(r.data());
            const auto coeffs = random_vector(rows.size(), rng);
            ya = y0;
            yb = y0;
            ref.accumulate(ya.data(), coeffs.data(), ptrs.data(), ptrs.size(), n);
            vec.accumulate(yb.data(), coeffs.data(), ptrs.data(), ptrs.size(), n);
            CHECK(bit_equal(ya, yb));

            // Padded row so that c[-1] and c[n] are readable.
            const auto c = random_vector(n + 2, rng);
            const auto up = random_vector(n, rng);
            const auto down = random_vector(n, rng);
            std::vector<double> oa(n), ob(n);
            ref.stencil5_row(oa.data(), c.data() + 1, up.data(), down.data(), n, 4.0e3, 2.5e3);
            vec.stencil5_row(ob.data(), c.data() + 1, up.data(), down.data(), n, 4.0e3, 2.5e3);
            CHECK(bit_equal(oa, ob));
        }
    }
}

TEST_CASE("scalar dot matches a plain sum to rounding") {
    std::mt19937_64 rng(3);
    const auto x = random_vector(101, rng);
    const auto y = random_vector(101, rng);
    double plain = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) plain += x[i] * y[i];
    CHECK(k::scalar_table().dot(x.data(), y.data(), x.size()) == doctest::Approx(plain).epsilon(1e-13));
}

TEST_CASE("a full forward solve is bit-identical under every variant") {
    IsaGuard guard;
    const SpaceGrid sg = SpaceGrid::unit_square(17);
    const TimeGrid tg(0.5, 20);
    EvolutionProblem p(FracOrder(0.6), tg, sg);
    p.initial_value = Field::sample(sg, [](const Point& x) { return x[0] * (1 - x[0]) * x[1] * (1 - x[1]); });

    k::set_active_isa(k::Isa::Scalar);
    const SpaceTimeField ref = solve_forward(p);
    for (k::Isa isa : vector_isas()) {
        k::set_active_isa(isa);
        const SpaceTimeField got = solve_forward(p);
        for (std::size_t n = 0; n < ref.n_nodes(); ++n) {
            const auto a = ref[n].values();
            const auto b = got[n].values();
            REQUIRE(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
        }
    }
}
