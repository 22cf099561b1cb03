#pragma once

// Node-centred fields on axis-aligned intervals and rectangles.
//
// Storage is row-major with x fastest: index = iy * nx + ix. Boundary nodes
// are stored; differential operators are meaningful on interior nodes and
// leave boundary entries at zero unless stated otherwise.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace fracmove {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t nodes = 0;  // including both boundary nodes

    double spacing() const { return (hi - lo) / static_cast<double>(nodes - 1); }
    double coord(std::size_t i) const {
        return i + 1 == nodes ? hi : lo + static_cast<double>(i) * spacing();
    }
    friend bool operator==(const Axis&, const Axis&) = default;
};

using Point = std::array<double, 2>;  // unused components are 0 in 1D

class SpaceGrid {
public:
    SpaceGrid(Axis x);           // 1D
    SpaceGrid(Axis x, Axis y);   // 2D

    static SpaceGrid unit_interval(std::size_t nodes) { return SpaceGrid(Axis{0.0, 1.0, nodes}); }
    static SpaceGrid unit_square(std::size_t nodes) {
        return SpaceGrid(Axis{0.0, 1.0, nodes}, Axis{0.0, 1.0, nodes});
    }

    int dim() const { return dim_; }
    const Axis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
    std::size_t nx() const { return axes_[0].nodes; }
    std::size_t ny() const { return dim_ == 2 ? axes_[1].nodes : 1; }
    std::size_t size() const { return nx() * ny(); }
    double spacing(int a) const { return axis(a).spacing(); }
    double min_spacing() const;
    double min_extent() const;
    double diameter() const;

    std::size_t index(std::size_t ix, std::size_t iy = 0) const { return iy * nx() + ix; }
    std::size_t ix(std::size_t idx) const { return idx % nx(); }
    std::size_t iy(std::size_t idx) const { return idx / nx(); }
    Point point(std::size_t idx) const;
    bool is_boundary(std::size_t idx) const;
    /// Euclidean distance from the node to the rectangle boundary.
    double distance_to_boundary(std::size_t idx) const;
    bool contains_strictly(const Point& p) const;

    /// Trapezoid quadrature weight of each node.
    const std::vector<double>& weights() const { return *weights_; }

    friend bool operator==(const SpaceGrid& a, const SpaceGrid& b) {
        return a.dim_ == b.dim_ && a.axes_ == b.axes_;
    }

private:
    void init();

    int dim_;
    std::array<Axis, 2> axes_;
    std::shared_ptr<const std::vector<double>> weights_;
};

class Field {
public:
    explicit Field(const SpaceGrid& grid);  // zeros
    Field(const SpaceGrid& grid, std::vector<double> values);

    template <class F>
    static Field sample(const SpaceGrid& grid, F&& fn) {
        Field out(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = fn(grid.point(i));
        return out;
    }

    const SpaceGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);
    /// this += a * x
    Field& axpy(double a, const Field& x);
    void zero_boundary();
    double max_abs() const;

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }

private:
    SpaceGrid grid_;
    std::vector<double> values_;
};

/// Observation region: the frame of nodes closer than frame_width to the boundary.
class ObservationMask {
public:
    ObservationMask(const SpaceGrid& grid, double frame_width);

    const SpaceGrid& grid() const { return grid_; }
    double frame_width() const { return frame_width_; }
    bool contains(std::size_t idx) const { return flags_[idx] != 0; }
    const std::vector<std::uint8_t>& flags() const { return flags_; }
    /// Masked trapezoid weights (zero outside the frame).
    const std::vector<double>& weights() const { return weights_; }
    std::size_t count() const;

private:
    SpaceGrid grid_;
    double frame_width_;
    std::vector<std::uint8_t> flags_;
    std::vector<double> weights_;
};

/// 3-point / 5-point Laplacian on interior nodes; boundary entries are 0.
Field laplacian(const Field& phi);

/// Dirichlet Laplacian: laplacian of phi with its boundary values treated as 0.
Field dirichlet_laplacian(const Field& phi);

/// Central differences inside, second-order one-sided differences at boundary nodes.
std::vector<Field> gradient(const Field& phi);

/// Gradient using only nodes inside the mask: along every grid line the
/// masked nodes split into runs; central differences inside a run and
/// second-order one-sided differences at run ends. Zero outside the mask.
std::vector<Field> gradient_in_mask(const Field& phi, const ObservationMask& mask);

/// Directional derivative v . grad(phi).
Field directional_derivative(const Field& phi, const Point& v);
Field directional_derivative_in_mask(const Field& phi, const Point& v, const ObservationMask& mask);

/// Trapezoid-weighted discrete L2 inner product, optionally restricted to the mask.
double inner_product(const Field& u, const Field& v, const ObservationMask* mask = nullptr);
double l2_norm(const Field& u, const ObservationMask* mask = nullptr);

/// Edge-difference Dirichlet energy sum |grad_h phi|^2 h^d; equals
/// <-laplacian phi, phi> for fields vanishing on the boundary.
double dirichlet_energy(const Field& phi);

Field restrict_to_mask(const Field& phi, const ObservationMask& mask);

void check_same_grid(const Field& a, const Field& b, const char* where);

/// Bilinear (linear in 1D) interpolation; 0 outside the closed rectangle.
double interpolate(const Field& f, const Point& x);

}  // namespace fracmove
