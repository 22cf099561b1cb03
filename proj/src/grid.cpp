#include "fracmove/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracmove/errors.hpp"
#include "fracmove/kernels.hpp"

namespace fracmove {

namespace {

void check_axis(const Axis& a) {
    if (!(a.lo < a.hi)) throw ConfigError("SpaceGrid: axis requires lo < hi");
    if (a.nodes < 5) throw ConfigError("SpaceGrid: need at least 3 interior nodes per axis");
}

}  // namespace

SpaceGrid::SpaceGrid(Axis x) : dim_(1), axes_{x, Axis{0.0, 0.0, 1}} {
    check_axis(x);
    init();
}

SpaceGrid::SpaceGrid(Axis x, Axis y) : dim_(2), axes_{x, y} {
    check_axis(x);
    check_axis(y);
    init();
}

void SpaceGrid::init() {
    auto w = std::make_shared<std::vector<double>>(size());
    const double hx = spacing(0);
    const double hy = dim_ == 2 ? spacing(1) : 1.0;
    for (std::size_t j = 0; j < ny(); ++j) {
        const double wy = dim_ == 1 ? 1.0 : ((j == 0 || j + 1 == ny()) ? 0.5 * hy : hy);
        for (std::size_t i = 0; i < nx(); ++i) {
            const double wx = (i == 0 || i + 1 == nx()) ? 0.5 * hx : hx;
            (*w)[index(i, j)] = wx * wy;
        }
    }
    weights_ = std::move(w);
}

double SpaceGrid::min_spacing() const {
    return dim_ == 1 ? spacing(0) : std::min(spacing(0), spacing(1));
}

double SpaceGrid::min_extent() const {
    const double ex = axes_[0].hi - axes_[0].lo;
    return dim_ == 1 ? ex : std::min(ex, axes_[1].hi - axes_[1].lo);
}

double SpaceGrid::diameter() const {
    const double ex = axes_[0].hi - axes_[0].lo;
    if (dim_ == 1) return ex;
    const double ey = axes_[1].hi - axes_[1].lo;
    return std::hypot(ex, ey);
}

Point SpaceGrid::point(std::size_t idx) const {
    return {axes_[0].coord(ix(idx)), dim_ == 2 ? axes_[1].coord(iy(idx)) : 0.0};
}

bool SpaceGrid::is_boundary(std::size_t idx) const {
    const std::size_t i = ix(idx);
    if (i == 0 || i + 1 == nx()) return true;
    if (dim_ == 2) {
        const std::size_t j = iy(idx);
        if (j == 0 || j + 1 == ny()) return true;
    }
    return false;
}

double SpaceGrid::distance_to_boundary(std::size_t idx) const {
    const Point p = point(idx);
    double d = std::min(p[0] - axes_[0].lo, axes_[0].hi - p[0]);
    if (dim_ == 2) d = std::min({d, p[1] - axes_[1].lo, axes_[1].hi - p[1]});
    return std::max(d, 0.0);
}

bool SpaceGrid::contains_strictly(const Point& p) const {
    if (!(p[0] > axes_[0].lo && p[0] < axes_[0].hi)) return false;
    if (dim_ == 2 && !(p[1] > axes_[1].lo && p[1] < axes_[1].hi)) return false;
    return true;
}

Field::Field(const SpaceGrid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(const SpaceGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw SizeError("Field: value count " + std::to_string(values_.size()) +
                        " does not match grid size " + std::to_string(grid_.size()));
    }
}

void check_same_grid(const Field& a, const Field& b, const char* where) {
    if (!(a.grid() == b.grid())) throw SizeError(std::string(where) + ": grid mismatch");
}

Field& Field::operator+=(const Field& o) {
    check_same_grid(*this, o, "Field::operator+=");
    kernels::axpy(values_, 1.0, o.values());
    return *this;
}

Field& Field::operator-=(const Field& o) {
    check_same_grid(*this, o, "Field::operator-=");
    kernels::axpy(values_, -1.0, o.values());
    return *this;
}

Field& Field::operator*=(double s) {
    for (auto& v : values_) v *= s;
    return *this;
}

Field& Field::axpy(double a, const Field& x) {
    check_same_grid(*this, x, "Field::axpy");
    kernels::axpy(values_, a, x.values());
    return *this;
}

void Field::zero_boundary() {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (grid_.is_boundary(i)) values_[i] = 0.0;
    }
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

ObservationMask::ObservationMask(const SpaceGrid& grid, double frame_width)
    : grid_(grid), frame_width_(frame_width), flags_(grid.size(), 0), weights_(grid.size(), 0.0) {
    if (!(frame_width > 0.0) || !(frame_width < 0.5 * grid.min_extent())) {
        throw ConfigError("ObservationMask: frame width must lie in (0, min_extent / 2), got " +
                          std::to_string(frame_width));
    }
    const auto& w = grid.weights();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.distance_to_boundary(i) < frame_width) {
            flags_[i] = 1;
            weights_[i] = w[i];
        }
    }
}

std::size_t ObservationMask::count() const {
    return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

Field laplacian(const Field& phi) {
    const SpaceGrid& g = phi.grid();
    Field out(g);
    const auto in = phi.values();
    auto res = out.values();
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const std::size_t nx = g.nx();
    const auto& k = kernels::active();
    if (g.dim() == 1) {
        // Vertical neighbours alias the centre row with zero weight.
        k.stencil5_row(res.data() + 1, in.data() + 1, in.data() + 1, in.data() + 1, nx - 2, ihx2, 0.0);
        return out;
    }
    const double ihy2 = 1.0 / (g.spacing(1) * g.spacing(1));
    for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
        const std::size_t row = j * nx;
        k.stencil5_row(res.data() + row + 1, in.data() + row + 1, in.data() + row + nx + 1,
                       in.data() + row - nx + 1, nx - 2, ihx2, ihy2);
    }
    return out;
}

Field dirichlet_laplacian(const Field& phi) {
    Field tmp = phi;
    tmp.zero_boundary();
    return laplacian(tmp);
}

namespace {

// Differentiates phi along one axis using only flagged nodes.
void diff_along_axis(const Field& phi, const std::vector<std::uint8_t>& flags, int axis,
                     Field& out) {
    const SpaceGrid& g = phi.grid();
    const double h = g.spacing(axis);
    const std::size_t n_line = axis == 0 ? g.nx() : g.ny();
    const std::size_t n_lines = axis == 0 ? g.ny() : g.nx();
    const auto at = [&](std::size_t line, std::size_t k) {
        return axis == 0 ? g.index(k, line) : g.index(line, k);
    };
    for (std::size_t line = 0; line < n_lines; ++line) {
        std::size_t k = 0;
        while (k < n_line) {
            if (!flags[at(line, k)]) {
                ++k;
                continue;
            }
            std::size_t e = k;
            while (e + 1 < n_line && flags[at(line, e + 1)]) ++e;
            const std::size_t len = e - k + 1;
            const auto v = [&](std::size_t m) { return phi[at(line, m)]; };
            if (len >= 3) {
                out[at(line, k)] = (-3.0 * v(k) + 4.0 * v(k + 1) - v(k + 2)) / (2.0 * h);
                for (std::size_t m = k + 1; m < e; ++m) {
                    out[at(line, m)] = (v(m + 1) - v(m - 1)) / (2.0 * h);
                }
                out[at(line, e)] = (3.0 * v(e) - 4.0 * v(e - 1) + v(e - 2)) / (2.0 * h);
            } else if (len == 2) {
                const double d = (v(e) - v(k)) / h;
                out[at(line, k)] = d;
                out[at(line, e)] = d;
            } else {
                out[at(line, k)] = 0.0;
            }
            k = e + 1;
        }
    }
}

std::vector<Field> gradient_with_flags(const Field& phi, const std::vector<std::uint8_t>& flags) {
    const SpaceGrid& g = phi.grid();
    std::vector<Field> out;
    for (int a = 0; a < g.dim(); ++a) {
        Field d(g);
        diff_along_axis(phi, flags, a, d);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace

std::vector<Field> gradient(const Field& phi) {
    const std::vector<std::uint8_t> all(phi.size(), 1);
    return gradient_with_flags(phi, all);
}

std::vector<Field> gradient_in_mask(const Field& phi, const ObservationMask& mask) {
    check_same_grid(phi, Field(mask.grid()), "gradient_in_mask");
    return gradient_with_flags(phi, mask.flags());
}

namespace {

Field combine_direction(const std::vector<Field>& grad, const Point& v, const SpaceGrid& g) {
    Field out(g);
    for (std::size_t a = 0; a < grad.size(); ++a) {
        if (v[a] != 0.0) out.axpy(v[a], grad[a]);
    }
    return out;
}

}  // namespace

Field directional_derivative(const Field& phi, const Point& v) {
    return combine_direction(gradient(phi), v, phi.grid());
}

Field directional_derivative_in_mask(const Field& phi, const Point& v, const ObservationMask& mask) {
    return combine_direction(gradient_in_mask(phi, mask), v, phi.grid());
}

double inner_product(const Field& u, const Field& v, const ObservationMask* mask) {
    check_same_grid(u, v, "inner_product");
    if (mask != nullptr) {
        if (!(mask->grid() == u.grid())) throw SizeError("inner_product: mask grid mismatch");
        return kernels::weighted_dot(u.values(), v.values(), mask->weights());
    }
    return kernels::weighted_dot(u.values(), v.values(), u.grid().weights());
}

double l2_norm(const Field& u, const ObservationMask* mask) {
    return std::sqrt(std::max(0.0, inner_product(u, u, mask)));
}

double dirichlet_energy(const Field& phi) {
    const SpaceGrid& g = phi.grid();
    const double hx = g.spacing(0);
    const double hy = g.dim() == 2 ? g.spacing(1) : 1.0;
    const double cell = hx * hy;
    double e = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
            const double d = (phi[g.index(i + 1, j)] - phi[g.index(i, j)]) / hx;
            e += d * d * cell;
        }
    }
    if (g.dim() == 2) {
        for (std::size_t j = 0; j + 1 < g.ny(); ++j) {
            for (std::size_t i = 0; i < g.nx(); ++i) {
                const double d = (phi[g.index(i, j + 1)] - phi[g.index(i, j)]) / hy;
                e += d * d * cell;
            }
        }
    }
    return e;
}

Field restrict_to_mask(const Field& phi, const ObservationMask& mask) {
    if (!(mask.grid() == phi.grid())) throw SizeError("restrict_to_mask: grid mismatch");
    Field out = phi;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!mask.contains(i)) out[i] = 0.0;
    }
    return out;
}

namespace {

// Cell index and local coordinate in [0, 1]; false outside [lo, hi].
bool locate(const Axis& a, double x, std::size_t& i, double& t) {
    const double h = a.spacing();
    const double slack = 1e-12 * h;
    if (x < a.lo - slack || x > a.hi + slack) return false;
    double s = (x - a.lo) / h;
    s = std::clamp(s, 0.0, static_cast<double>(a.nodes - 1));
    i = std::min(static_cast<std::size_t>(s), a.nodes - 2);
    t = s - static_cast<double>(i);
    return true;
}

}  // namespace

double interpolate(const Field& f, const Point& x) {
    const SpaceGrid& g = f.grid();
    std::size_t i = 0, j = 0;
    double tx = 0.0, ty = 0.0;
    if (!locate(g.axis(0), x[0], i, tx)) return 0.0;
    if (g.dim() == 1) return (1.0 - tx) * f[i] + tx * f[i + 1];
    if (!locate(g.axis(1), x[1], j, ty)) return 0.0;
    const double f00 = f[g.index(i, j)], f10 = f[g.index(i + 1, j)];
    const double f01 = f[g.index(i, j + 1)], f11 = f[g.index(i + 1, j + 1)];
    return (1.0 - ty) * ((1.0 - tx) * f00 + tx * f10) + ty * ((1.0 - tx) * f01 + tx * f11);
}

}  // namespace fracmove
