#include "fracmove/convect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracmove/errors.hpp"
#include "fracmove/linsolve.hpp"

namespace fracmove {

namespace {
constexpr double kDegenerate = 1e-14;
constexpr std::size_t kMinInterior = 3;
}  // namespace

double Rotation::determinant() const {
    const Rotation& q = *this;
    switch (dim) {
        case 1: return q(0, 0);
        case 2: return q(0, 0) * q(1, 1) - q(0, 1) * q(1, 0);
        case 3:
            return q(0, 0) * (q(1, 1) * q(2, 2) - q(1, 2) * q(2, 1)) -
                   q(0, 1) * (q(1, 0) * q(2, 2) - q(1, 2) * q(2, 0)) +
                   q(0, 2) * (q(1, 0) * q(2, 1) - q(1, 1) * q(2, 0));
        default: throw DomainError("Rotation::determinant: dim > 3 unsupported");
    }
}

std::vector<double> Rotation::to_rotated(std::span<const double> x) const {
    std::vector<double> xi(static_cast<std::size_t>(dim), 0.0);
    for (int j = 0; j < dim; ++j) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += (*this)(i, j) * x[static_cast<std::size_t>(i)];
        xi[static_cast<std::size_t>(j)] = s;
    }
    return xi;
}

Rotation build_rotation(std::span<const double> r) {
    const int d = static_cast<int>(r.size());
    if (d < 1) throw DomainError("build_rotation: empty direction");
    double norm = 0.0;
    for (double x : r) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm >= kDegenerate)) throw DomainError("build_rotation: degenerate direction |r| < 1e-14");

    Rotation q;
    q.dim = d;
    q.matrix.assign(static_cast<std::size_t>(d * d), 0.0);
    std::vector<double> u(r.begin(), r.end());
    for (auto& x : u) x /= norm;
    const std::vector<double> rhat = u;
    u[0] -= 1.0;
    double uu = 0.0;
    for (double x : u) uu += x * x;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double id = i == j ? 1.0 : 0.0;
            q.matrix[static_cast<std::size_t>(i * d + j)] =
                uu == 0.0 ? id : id - 2.0 * u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(j)] / uu;
        }
    }
    // The first column is r/|r| by construction; store it exactly.
    for (int i = 0; i < d; ++i) q.matrix[static_cast<std::size_t>(i * d)] = rhat[static_cast<std::size_t>(i)];
    if (uu != 0.0 && d >= 2) {
        for (int i = 0; i < d; ++i) q.matrix[static_cast<std::size_t>(i * d + d - 1)] *= -1.0;
    }
    return q;
}

Field compute_rhs_c(const Field& a, const Field& b, const MotionSpec& motion) {
    check_same_grid(a, b, "compute_rhs_c");
    Field c = b;
    c -= directional_derivative(a, motion.p);
    c.zero_boundary();
    return c;
}

std::vector<double> chord_bvp_solve(std::span<const double> c, double ds, double r_norm) {
    const std::size_t n = c.size();
    if (n < 3) throw SizeError("chord_bvp_solve: need at least 3 samples");
    if (!(ds > 0.0) || !(r_norm > 0.0)) throw DomainError("chord_bvp_solve: spacing and |r| must be positive");
    const std::size_t m = n - 2;
    std::vector<double> sub(m, 1.0), diag(m, -2.0), sup(m, 1.0), rhs(m);
    const double scale = ds / (2.0 * r_norm);  // ds^2 / (2 ds |r|)
    for (std::size_t i = 0; i < m; ++i) rhs[i] = scale * (c[i + 2] - c[i]);
    const auto x = thomas_solve(sub, diag, sup, rhs);
    std::vector<double> f(n, 0.0);
    std::copy(x.begin(), x.end(), f.begin() + 1);
    return f;
}

namespace {

// Parameter interval of {sigma : lo <= sigma * dir + offset <= hi} on every axis.
bool clip(const SpaceGrid& g, const double* dir, const double* offset, double& s_lo, double& s_hi) {
    s_lo = -std::numeric_limits<double>::infinity();
    s_hi = std::numeric_limits<double>::infinity();
    for (int a = 0; a < g.dim(); ++a) {
        const double lo = g.axis(a).lo, hi = g.axis(a).hi;
        if (std::abs(dir[a]) < 1e-15) {
            if (offset[a] < lo || offset[a] > hi) return false;
            continue;
        }
        double t0 = (lo - offset[a]) / dir[a], t1 = (hi - offset[a]) / dir[a];
        if (t0 > t1) std::swap(t0, t1);
        s_lo = std::max(s_lo, t0);
        s_hi = std::min(s_hi, t1);
    }
    return s_hi > s_lo;
}

// Linear interpolation of chord samples at parameter sigma; 0 outside.
double chord_value(const Chord& ch, double sigma) {
    if (!ch.solved || ch.xi1.size() < 2) return 0.0;
    const double lo = ch.xi1.front(), hi = ch.xi1.back();
    const double span = hi - lo;
    const double slack = 1e-12 * span;
    if (sigma < lo - slack || sigma > hi + slack) return 0.0;
    const double ds = span / static_cast<double>(ch.xi1.size() - 1);
    double s = std::clamp((sigma - lo) / ds, 0.0, static_cast<double>(ch.xi1.size() - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(s), ch.xi1.size() - 2);
    const double t = s - static_cast<double>(i);
    return (1.0 - t) * ch.f_hat[i] + t * ch.f_hat[i + 1];
}

}  // namespace

ChordSet build_chords(const SpaceGrid& grid, const Rotation& q) {
    const int d = grid.dim();
    if (q.dim != d) throw SizeError("build_chords: rotation and grid dimensions differ");
    const double h = grid.min_spacing();
    const double dir[2] = {q(0, 0), d == 2 ? q(1, 0) : 0.0};
    ChordSet set;

    std::vector<double> perps;
    if (d == 1) {
        perps.push_back(0.0);
        set.perp_lo = 0.0;
        set.perp_pitch = 0.0;
    } else {
        const double nrm[2] = {q(0, 1), q(1, 1)};
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int cx = 0; cx < 2; ++cx) {
            for (int cy = 0; cy < 2; ++cy) {
                const double x = cx ? grid.axis(0).hi : grid.axis(0).lo;
                const double y = cy ? grid.axis(1).hi : grid.axis(1).lo;
                const double s = nrm[0] * x + nrm[1] * y;
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
        }
        const auto k = static_cast<std::size_t>(std::ceil((hi - lo) / h - 1e-9));
        set.perp_lo = lo;
        set.perp_pitch = (hi - lo) / static_cast<double>(k);
        for (std::size_t i = 0; i <= k; ++i) perps.push_back(lo + static_cast<double>(i) * set.perp_pitch);
    }

    for (double s : perps) {
        Chord ch;
        ch.xi_perp = s;
        const double offset[2] = {d == 2 ? s * q(0, 1) : 0.0, d == 2 ? s * q(1, 1) : 0.0};
        double lo = 0.0, hi = 0.0;
        if (clip(grid, dir, offset, lo, hi)) {
            ch.xi1_left = lo;
            ch.xi1_right = hi;
            const auto segs = static_cast<std::size_t>(std::ceil((hi - lo) / h - 1e-9));
            if (segs >= 1) {
                ch.xi1.resize(segs + 1);
                for (std::size_t i = 0; i <= segs; ++i) {
                    ch.xi1[i] = i == segs ? hi : lo + static_cast<double>(i) * (hi - lo) / static_cast<double>(segs);
                }
            }
        }
        set.chords.push_back(std::move(ch));
    }
    return set;
}

ConvectResult solve_convection(const Field& a, const Field& b, const MotionSpec& motion) {
    check_same_grid(a, b, "solve_convection");
    const SpaceGrid& g = a.grid();
    const Point r = motion.relative();
    const double r_norm = std::hypot(r[0], r[1]);
    if (!(r_norm > kDegenerate)) throw DomainError("solve_convection: p and q coincide (|q - p| <= 1e-14)");
    const int d = g.dim();
    if (d == 1 && r[1] != 0.0) throw DomainError("solve_convection: 1D grid needs velocities along x");

    const std::vector<double> rv(r.begin(), r.begin() + d);
    ConvectResult out{Field(g), Field(g), compute_rhs_c(a, b, motion), build_rotation(rv), {}, {}};
    out.chords = build_chords(g, out.rotation);
    const double dir[2] = {out.rotation(0, 0), d == 2 ? out.rotation(1, 0) : 0.0};
    const double nrm[2] = {d == 2 ? out.rotation(0, 1) : 0.0, d == 2 ? out.rotation(1, 1) : 0.0};

    auto& diag = out.diagnostics;
    for (auto& ch : out.chords.chords) {
        ++diag.chords_total;
        if (ch.xi1.size() < kMinInterior + 2) {
            ++diag.chords_skipped;
            continue;
        }
        ch.c_hat.resize(ch.xi1.size());
        for (std::size_t i = 0; i < ch.xi1.size(); ++i) {
            const Point x{ch.xi1[i] * dir[0] + ch.xi_perp * nrm[0], ch.xi1[i] * dir[1] + ch.xi_perp * nrm[1]};
            ch.c_hat[i] = interpolate(out.c, x);
        }
        const double ds = (ch.xi1.back() - ch.xi1.front()) / static_cast<double>(ch.xi1.size() - 1);
        ch.f_hat = chord_bvp_solve(ch.c_hat, ds, r_norm);
        ch.solved = true;
        ++diag.chords_solved;
    }

    std::size_t interior = 0, touched = 0;
    const auto& chords = out.chords.chords;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.is_boundary(i)) continue;
        ++interior;
        const Point x = g.point(i);
        const double sigma = dir[0] * x[0] + dir[1] * x[1];
        if (d == 1) {
            out.f[i] = chord_value(chords.front(), sigma);
            if (!chords.front().solved) ++touched;
            continue;
        }
        const double s = nrm[0] * x[0] + nrm[1] * x[1];
        double u = (s - out.chords.perp_lo) / out.chords.perp_pitch;
        u = std::clamp(u, 0.0, static_cast<double>(chords.size() - 1));
        const std::size_t k = std::min(static_cast<std::size_t>(u), chords.size() - 2);
        const double t = u - static_cast<double>(k);
        if (!chords[k].solved || !chords[k + 1].solved) ++touched;
        out.f[i] = (1.0 - t) * chord_value(chords[k], sigma) + t * chord_value(chords[k + 1], sigma);
    }
    diag.skipped_area_fraction = interior ? static_cast<double>(touched) / static_cast<double>(interior) : 0.0;

    out.f.zero_boundary();
    out.g = a - out.f;
    out.g.zero_boundary();
    return out;
}

}  // namespace fracmove
