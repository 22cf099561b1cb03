#include "fracmove/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fracmove/errors.hpp"

namespace fracmove {

namespace {
constexpr double kGaussianCutoff = 1e-14;
constexpr double kSupportLevel = 1e-12;
}  // namespace

std::string_view profile_kind_name(ProfileKind k) {
    switch (k) {
        case ProfileKind::GaussianBump: return "gaussian";
        case ProfileKind::PolynomialBump: return "polynomial";
        case ProfileKind::Sampled: return "sampled";
    }
    return "unknown";
}

ProfileKind parse_profile_kind(std::string_view name) {
    if (name == "gaussian") return ProfileKind::GaussianBump;
    if (name == "polynomial") return ProfileKind::PolynomialBump;
    if (name == "sampled") return ProfileKind::Sampled;
    throw ConfigError("unknown profile kind '" + std::string(name) + "'");
}

namespace {
void check_analytic(double width, double amplitude) {
    if (!(width > 0.0) || !std::isfinite(width)) throw ConfigError("Profile: width must be positive");
    if (!std::isfinite(amplitude)) throw ConfigError("Profile: amplitude must be finite");
}
}  // namespace

Profile Profile::gaussian(Point center, double width, double amplitude) {
    check_analytic(width, amplitude);
    return Profile(ProfileKind::GaussianBump, center, width, amplitude, std::nullopt);
}

Profile Profile::polynomial(Point center, double width, double amplitude) {
    check_analytic(width, amplitude);
    return Profile(ProfileKind::PolynomialBump, center, width, amplitude, std::nullopt);
}

Profile Profile::sampled(Field samples) {
    const double a = samples.max_abs();
    for (double v : samples.values()) {
        if (!std::isfinite(v)) throw ConfigError("Profile: sampled values must be finite");
    }
    return Profile(ProfileKind::Sampled, Point{0.0, 0.0}, 0.0, a, std::move(samples));
}

double Profile::operator()(const Point& x) const {
    switch (kind_) {
        case ProfileKind::GaussianBump: {
            const double dx = x[0] - center_[0], dy = x[1] - center_[1];
            const double e = std::exp(-(dx * dx + dy * dy) / (2.0 * width_ * width_));
            return e < kGaussianCutoff ? 0.0 : amplitude_ * e;
        }
        case ProfileKind::PolynomialBump: {
            const double dx = x[0] - center_[0], dy = x[1] - center_[1];
            const double s = 1.0 - (dx * dx + dy * dy) / (width_ * width_);
            if (s <= 0.0) return 0.0;
            const double s2 = s * s;
            return amplitude_ * s2 * s2;
        }
        case ProfileKind::Sampled:
            return interpolate(*samples_, x);
    }
    return 0.0;
}

Point Profile::gradient(const Point& x) const {
    const double dx = x[0] - center_[0], dy = x[1] - center_[1];
    switch (kind_) {
        case ProfileKind::GaussianBump: {
            const double v = (*this)(x);
            const double k = -v / (width_ * width_);
            return {k * dx, k * dy};
        }
        case ProfileKind::PolynomialBump: {
            const double s = 1.0 - (dx * dx + dy * dy) / (width_ * width_);
            if (s <= 0.0) return {0.0, 0.0};
            const double k = -8.0 * amplitude_ * s * s * s / (width_ * width_);
            return {k * dx, k * dy};
        }
        case ProfileKind::Sampled: {
            const auto grad = fracmove::gradient(*samples_);
            const Field gy = grad.size() > 1 ? grad[1] : Field(samples_->grid());
            return {interpolate(grad[0], x), interpolate(gy, x)};
        }
    }
    return {0.0, 0.0};
}

Field Profile::sample(const SpaceGrid& grid) const {
    return Field::sample(grid, [this](const Point& x) { return (*this)(x); });
}

double Profile::support_radius() const {
    if (amplitude_ == 0.0) return 0.0;
    switch (kind_) {
        case ProfileKind::GaussianBump:
            return width_ * std::sqrt(2.0 * std::log(1.0 / kSupportLevel));
        case ProfileKind::PolynomialBump:
            return width_;
        case ProfileKind::Sampled:
            break;
    }
    throw DomainError("Profile::support_radius: sampled profiles have no analytic radius");
}

Point MotionSpec::relative() const {
    if (!q) throw ConfigError("MotionSpec: second velocity q is required");
    return {(*q)[0] - p[0], (*q)[1] - p[1]};
}

Field eval_moving_source(const Profile& profile, const Point& velocity, double t, const SpaceGrid& grid) {
    return Field::sample(grid, [&](const Point& x) {
        return profile(Point{x[0] - velocity[0] * t, x[1] - velocity[1] * t});
    });
}

SpaceTimeField moving_source(const Profile& f, const std::optional<Profile>& g, const MotionSpec& motion,
                             const TimeGrid& tgrid, const SpaceGrid& sgrid) {
    SpaceTimeField out(tgrid, sgrid);
    if (g && !motion.q) throw ConfigError("moving_source: second profile requires q");
    for (std::size_t n = 0; n < tgrid.n_nodes(); ++n) {
        const double t = tgrid.node(n);
        out[n] = eval_moving_source(f, motion.p, t, sgrid);
        if (g) out[n] += eval_moving_source(*g, *motion.q, t, sgrid);
    }
    return out;
}

namespace {

bool strictly_inside(const SpaceGrid& g, const Point& c, double radius) {
    for (int a = 0; a < g.dim(); ++a) {
        if (!(c[a] - radius > g.axis(a).lo && c[a] + radius < g.axis(a).hi)) return false;
    }
    return true;
}

bool profile_inside(const Profile& prof, const Point& shift, const SpaceGrid& g) {
    if (prof.amplitude() == 0.0) return true;
    if (prof.kind() != ProfileKind::Sampled) {
        const Point c{prof.center()[0] + shift[0], prof.center()[1] + shift[1]};
        return strictly_inside(g, c, prof.support_radius());
    }
    const Field& s = *prof.samples();
    const double level = kSupportLevel * prof.amplitude();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::abs(s[i]) <= level) continue;
        const Point x = s.grid().point(i);
        if (!g.contains_strictly(Point{x[0] + shift[0], x[1] + shift[1]})) return false;
    }
    return true;
}

}  // namespace

SupportReport check_support_condition(const std::vector<MovingProfile>& profiles, FracOrder order,
                                      const TimeGrid& tgrid, const SpaceGrid& sgrid) {
    SupportReport rep;
    rep.wave_time_warning = order.alpha() == 2.0 && tgrid.t_final() <= 2.0 * sgrid.diameter();
    for (std::size_t n = 0; n < tgrid.n_nodes() && rep.ok; ++n) {
        const double t = tgrid.node(n);
        for (const auto& mp : profiles) {
            const Point shift{mp.velocity[0] * t, mp.velocity[1] * t};
            if (!profile_inside(mp.profile, shift, sgrid)) {
                rep.ok = false;
                rep.violating_step = n;
                rep.violating_time = t;
                rep.violating_profile = mp.name;
                std::ostringstream os;
                os << "support of profile '" << mp.name << "' leaves the domain at t = " << t
                   << " (time step " << n << ")";
                rep.message = os.str();
                break;
            }
        }
    }
    if (rep.ok) rep.message = "support condition satisfied";
    if (rep.wave_time_warning) {
        rep.message += "; warning: alpha = 2 and T <= 2 diam(domain)";
    }
    return rep;
}

NoisySample add_noise(const SpaceTimeField& clean, double delta, std::uint64_t seed,
                      const ObservationMask& mask) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("add_noise: delta must be >= 0");
    if (!(mask.grid() == clean.sgrid())) throw SizeError("add_noise: mask grid mismatch");
    NoisySample out{clean, clean, delta, seed};
    const double clean_norm = std::sqrt(spacetime_inner(clean, clean, &mask));
    if (delta == 0.0 || clean_norm == 0.0) return out;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SpaceTimeField noise(clean.tgrid(), clean.sgrid());
    for (std::size_t n = 1; n < noise.n_nodes(); ++n) {
        for (std::size_t i = 0; i < mask.grid().size(); ++i) {
            if (mask.contains(i)) noise[n][i] = normal(rng);
        }
    }
    const double noise_norm = std::sqrt(spacetime_inner(noise, noise, &mask));
    if (noise_norm == 0.0) return out;
    noise *= delta * clean_norm / noise_norm;
    out.noisy += noise;
    return out;
}

std::vector<double> gaussian_taps(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian_taps: sigma must be >= 0");
    if (sigma == 0.0) return {1.0};
    const auto radius = static_cast<std::size_t>(std::ceil(4.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
        const double d = static_cast<double>(k) - static_cast<double>(radius);
        taps[k] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += taps[k];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

namespace {

std::size_t reflect(long k, std::size_t len) {
    if (len == 1) return 0;
    const long last = static_cast<long>(len) - 1;
    const long period = 2 * last;
    k %= period;
    if (k < 0) k += period;
    return static_cast<std::size_t>(k <= last ? k : period - k);
}

// Convolves buf in place with taps under whole-sample reflection.
void smooth_line(std::vector<double>& buf, const std::vector<double>& taps, std::vector<double>& scratch) {
    const std::size_t len = buf.size();
    const long r = static_cast<long>(taps.size() / 2);
    scratch.assign(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
        double s = 0.0;
        for (long k = -r; k <= r; ++k) {
            s += taps[static_cast<std::size_t>(k + r)] * buf[reflect(static_cast<long>(i) + k, len)];
        }
        scratch[i] = s;
    }
    buf.swap(scratch);
}

void smooth_space(Field& f, const std::vector<double>& taps, int axis, const std::vector<std::uint8_t>& flags) {
    const SpaceGrid& g = f.grid();
    const std::size_t n_line = axis == 0 ? g.nx() : g.ny();
    const std::size_t n_lines = axis == 0 ? g.ny() : g.nx();
    const auto at = [&](std::size_t line, std::size_t k) {
        return axis == 0 ? g.index(k, line) : g.index(line, k);
    };
    std::vector<double> buf, scratch;
    for (std::size_t line = 0; line < n_lines; ++line) {
        std::size_t k = 0;
        while (k < n_line) {
            if (!flags[at(line, k)]) {
                ++k;
                continue;
            }
            std::size_t e = k;
            while (e + 1 < n_line && flags[at(line, e + 1)]) ++e;
            buf.clear();
            for (std::size_t m = k; m <= e; ++m) buf.push_back(f[at(line, m)]);
            smooth_line(buf, taps, scratch);
            for (std::size_t m = k; m <= e; ++m) f[at(line, m)] = buf[m - k];
            k = e + 1;
        }
    }
}

}  // namespace

SpaceTimeField mollify(const SpaceTimeField& data, double width_t, double width_x, const ObservationMask* mask) {
    if (!(width_t >= 0.0) || !(width_x >= 0.0)) throw DomainError("mollify: widths must be >= 0");
    SpaceTimeField out = data;
    const SpaceGrid& g = data.sgrid();
    if (width_t > 0.0) {
        const auto taps = gaussian_taps(width_t / data.tgrid().step());
        std::vector<double> buf, scratch;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (mask && !mask->contains(i)) continue;
            buf = out.series(i).values;
            smooth_line(buf, taps, scratch);
            out.set_series(i, TimeSeries(data.tgrid(), buf));
        }
    }
    if (width_x > 0.0) {
        const std::vector<std::uint8_t> all(g.size(), 1);
        const auto& flags = mask ? mask->flags() : all;
        for (int a = 0; a < g.dim(); ++a) {
            const auto taps = gaussian_taps(width_x / g.spacing(a));
            for (std::size_t n = 0; n < out.n_nodes(); ++n) smooth_space(out[n], taps, a, flags);
        }
    }
    return out;
}

double min_frame_width(const SpaceGrid& grid, ReconMode mode) {
    double h = grid.spacing(0);
    if (grid.dim() == 2) h = std::max(h, grid.spacing(1));
    return (mode == ReconMode::Single ? 2.0 : 3.0) * h;
}

namespace {

void check_frame(const ObservationMask& mask, const SpaceTimeField& u, ReconMode mode) {
    if (!(mask.grid() == u.sgrid())) throw SizeError("observation mask lives on another grid");
    const double need = min_frame_width(u.sgrid(), mode);
    if (!(mask.frame_width() > need)) {
        std::ostringstream os;
        os << "frame width " << mask.frame_width() << " too thin for one-sided stencils; need > " << need;
        throw ConfigError(os.str());
    }
}

SpaceTimeField directional_in_mask(const SpaceTimeField& u, const Point& v, const ObservationMask& mask) {
    std::vector<Field> s;
    s.reserve(u.n_nodes());
    for (const auto& f : u.slices()) s.push_back(directional_derivative_in_mask(f, v, mask));
    return SpaceTimeField(u.tgrid(), std::move(s));
}

SpaceTimeField restrict_stf(const SpaceTimeField& u, const ObservationMask& mask) {
    std::vector<Field> s;
    s.reserve(u.n_nodes());
    for (const auto& f : u.slices()) s.push_back(restrict_to_mask(f, mask));
    return SpaceTimeField(u.tgrid(), std::move(s));
}

SpaceTimeField boundary_stf(const SpaceTimeField& u) {
    SpaceTimeField out(u.tgrid(), u.sgrid());
    const SpaceGrid& g = u.sgrid();
    for (std::size_t n = 1; n < u.n_nodes(); ++n) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.is_boundary(i)) out[n][i] = u[n][i];
        }
    }
    return out;
}

Point sum(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }

// J^(1-alpha) d_t u for alpha <= 1, J^(2-alpha) d_t u for alpha > 1, both as
// L1 Caputo derivatives so each weight multiplies a cell increment.
SpaceTimeField time_part_single(const SpaceTimeField& u, FracOrder order) {
    if (order.ceil() == 1) return caputo_forward(u, order);
    return caputo_forward(u, FracOrder(order.alpha() - 1.0));
}

}  // namespace

SpaceTimeField build_v_delta_single(const SpaceTimeField& u, FracOrder order, const MotionSpec& motion,
                                    const ObservationMask& mask) {
    check_frame(mask, u, ReconMode::Single);
    SpaceTimeField v = time_part_single(u, order);
    v += rl_integral_forward(directional_in_mask(u, motion.p, mask), order.integral_order());
    v = restrict_stf(v, mask);
    // v(0) = f for alpha <= 1; the first node carries the best available value.
    if (order.ceil() == 1) {
        v[0] = v[1];
    } else {
        v[0] = Field(u.sgrid());
    }
    return v;
}

namespace {

// (p+q).grad C^(alpha-1) u + J^(2-alpha) p.grad(q.grad u), the terms without u_tt.
SpaceTimeField pair_space_terms(const SpaceTimeField& u, FracOrder order, const MotionSpec& motion,
                                const ObservationMask& mask) {
    const Point q = *motion.q;
    SpaceTimeField first = caputo_forward(u, FracOrder(order.alpha() - 1.0));
    SpaceTimeField out = directional_in_mask(first, sum(motion.p, q), mask);
    SpaceTimeField mixed = directional_in_mask(directional_in_mask(u, q, mask), motion.p, mask);
    out += rl_integral_forward(mixed, order.integral_order());
    return out;
}

void check_pair(FracOrder order, const MotionSpec& motion) {
    if (order.ceil() != 2) throw ConfigError("pair mode requires alpha > 1");
    if (!motion.q) throw ConfigError("pair mode requires the second velocity q");
}

}  // namespace

SpaceTimeField build_v_delta_pair(const SpaceTimeField& u, FracOrder order, const MotionSpec& motion,
                                  const ObservationMask& mask) {
    check_pair(order, motion);
    check_frame(mask, u, ReconMode::Pair);
    // The data start like t^alpha, so the stepper's first-step rule applies.
    SpaceTimeField v = caputo_forward(u, order, stepper_first_step(order));
    v += pair_space_terms(u, order, motion, mask);
    v = restrict_stf(v, mask);
    v[0] = v[1];
    return v;
}

SpaceTimeField build_frozen_boundary(const SpaceTimeField& u, FracOrder order, const MotionSpec& motion,
                                     const ObservationMask& mask, ReconMode mode) {
    check_frame(mask, u, mode);
    if (mode == ReconMode::Single) {
        return boundary_stf(rl_integral_forward(directional_in_mask(u, motion.p, mask), order.integral_order()));
    }
    check_pair(order, motion);
    return boundary_stf(pair_space_terms(u, order, motion, mask));
}

}  // namespace fracmove
