#pragma once

// Synthetic truths and data preparation for moving-source experiments.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracmove/fracpde.hpp"
#include "fracmove/grid.hpp"

namespace fracmove {

enum class ProfileKind { GaussianBump, PolynomialBump, Sampled };

std::string_view profile_kind_name(ProfileKind k);
ProfileKind parse_profile_kind(std::string_view name);

class Profile {
public:
    /// A exp(-|x-c|^2 / (2 w^2)), set to 0 where below 1e-14 of the peak.
    static Profile gaussian(Point center, double width, double amplitude);
    /// A (1 - |x-c|^2 / w^2)^4 inside the disc of radius w, 0 outside.
    static Profile polynomial(Point center, double width, double amplitude);
    /// Interpolated samples; 0 outside the sample grid.
    static Profile sampled(Field samples);

    ProfileKind kind() const { return kind_; }
    const Point& center() const { return center_; }
    double width() const { return width_; }
    double amplitude() const { return amplitude_; }
    const std::optional<Field>& samples() const { return samples_; }

    double operator()(const Point& x) const;
    /// Analytic gradient; sampled profiles use the gradient of the interpolant's grid values.
    Point gradient(const Point& x) const;
    Field sample(const SpaceGrid& grid) const;

    /// Radius of {|profile| > 1e-12 |amplitude|} around the center (analytic kinds).
    double support_radius() const;

private:
    Profile(ProfileKind k, Point c, double w, double a, std::optional<Field> s)
        : kind_(k), center_(c), width_(w), amplitude_(a), samples_(std::move(s)) {}

    ProfileKind kind_;
    Point center_;
    double width_;
    double amplitude_;
    std::optional<Field> samples_;
};

struct MotionSpec {
    Point p{0.0, 0.0};
    std::optional<Point> q;

    /// q - p; requires q.
    Point relative() const;
};

/// x -> profile(x - velocity * t) on the grid nodes.
Field eval_moving_source(const Profile& profile, const Point& velocity, double t, const SpaceGrid& grid);

/// Source F(x, t_n) = f(x - p t_n) [+ g(x - q t_n)] at every time node.
SpaceTimeField moving_source(const Profile& f, const std::optional<Profile>& g, const MotionSpec& motion,
                             const TimeGrid& tgrid, const SpaceGrid& sgrid);

struct MovingProfile {
    std::string name;
    Profile profile;
    Point velocity;
};

struct SupportReport {
    bool ok = true;
    std::optional<std::size_t> violating_step;
    std::optional<double> violating_time;
    std::string violating_profile;
    bool wave_time_warning = false;  // alpha = 2 and T <= 2 diam
    std::string message;
};

/// Sweeps the time nodes and checks that every translated numerical support
/// stays strictly inside the domain.
SupportReport check_support_condition(const std::vector<MovingProfile>& profiles, FracOrder order,
                                      const TimeGrid& tgrid, const SpaceGrid& sgrid);

struct NoisySample {
    SpaceTimeField clean;
    SpaceTimeField noisy;
    double delta;
    std::uint64_t seed;
};

/// Adds seeded Gaussian noise on observed nodes (time nodes n >= 1), rescaled
/// so that the relative L2(omega x (0,T)) error equals delta. A zero clean
/// field is returned unchanged.
NoisySample add_noise(const SpaceTimeField& clean, double delta, std::uint64_t seed,
                      const ObservationMask& mask);

/// Separable Gaussian smoothing with whole-sample reflection, truncated at 4
/// standard deviations and normalized. With a mask, spatial smoothing runs
/// only along contiguous masked segments and unmasked nodes are left unchanged.
SpaceTimeField mollify(const SpaceTimeField& data, double width_t, double width_x,
                       const ObservationMask* mask = nullptr);

/// Normalized truncated Gaussian taps for standard deviation sigma in units of the spacing.
std::vector<double> gaussian_taps(double sigma_in_steps);

/// v^delta = J^(m-alpha)(d_t + p.grad) u^delta on omega (zero elsewhere).
SpaceTimeField build_v_delta_single(const SpaceTimeField& u_delta, FracOrder order, const MotionSpec& motion,
                                    const ObservationMask& mask);

/// v^delta = J^(2-alpha)(d_t + p.grad)(d_t + q.grad) u^delta on omega; requires alpha > 1 and q.
SpaceTimeField build_v_delta_pair(const SpaceTimeField& u_delta, FracOrder order, const MotionSpec& motion,
                                  const ObservationMask& mask);

enum class ReconMode { Single, Pair };

/// Frozen Dirichlet trace for v: nonzero only on boundary nodes, zero at t = 0.
SpaceTimeField build_frozen_boundary(const SpaceTimeField& u_delta, FracOrder order, const MotionSpec& motion,
                                     const ObservationMask& mask, ReconMode mode);

/// Smallest admissible frame width for the one-sided stencils of the mode.
double min_frame_width(const SpaceGrid& grid, ReconMode mode);

}  // namespace fracmove
