#pragma once

// Discrete Riemann-Liouville integrals and Caputo / Riemann-Liouville
// derivatives on uniform time grids.
//
// Conventions shared by every operator here:
//  * a TimeSeries holds samples at t_k = k * step, k = 0..N (both endpoints);
//  * J^beta uses product-rectangle weights with right-endpoint samples,
//      (J^beta h)_n = sum_{j=1..n} w_{n-j} h_j,
//      w_k = step^beta / Gamma(beta + 1) * ((k + 1)^beta - k^beta),
//    and beta = 0 is the identity map;
//  * Caputo derivatives apply J^(m - alpha), m = ceil(alpha), to m-th backward
//    differences (L1 scheme, and L1 on second differences for alpha > 1); for
//    m = 2 the first difference is k (h_1 - h_0 - step h'(0)) with k from
//    FirstStep;
//  * forward-oriented results are 0 at t = 0;
//  * backward (T-) operators are time reversals of forward ones, so
//    J_{T-} h = reverse(J_{0+} reverse(h)) holds exactly.

#include <cstddef>
#include <vector>

namespace fracmove {

class TimeGrid {
public:
    TimeGrid(double t_final, std::size_t n_steps);

    double t_final() const { return t_final_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t n_nodes() const { return n_steps_ + 1; }
    double step() const { return step_; }
    double node(std::size_t k) const { return static_cast<double>(k) * step_; }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t_final_;
    std::size_t n_steps_;
    double step_;
};

/// Fractional order alpha in (0, 2].
class FracOrder {
public:
    explicit FracOrder(double alpha);

    double alpha() const { return alpha_; }
    /// ceil(alpha), the number of integer derivatives taken.
    int ceil() const { return ceil_; }
    /// ceil(alpha) - alpha, the order of the accompanying integral.
    double integral_order() const { return static_cast<double>(ceil_) - alpha_; }

private:
    double alpha_;
    int ceil_;
};

struct TimeSeries {
    TimeGrid grid;
    std::vector<double> values;

    TimeSeries(TimeGrid g, std::vector<double> v);
    explicit TimeSeries(TimeGrid g);  // zeros

    template <class F>
    static TimeSeries sample(const TimeGrid& g, F&& fn) {
        std::vector<double> v(g.n_nodes());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(g.node(k));
        return TimeSeries(g, std::move(v));
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
};

/// Product-rectangle convolution weights of J^beta, w_0..w_{N-1}.
std::vector<double> rl_weights(double beta, double step, std::size_t count);

/// Convolution weights and per-step constant of a discrete Caputo operator.
struct FracScheme {
    FracOrder order;
    double step;
    std::vector<double> weights;  // rl_weights(ceil - alpha, step, n_steps)
    double inv_step_pow;          // step^-ceil(alpha)

    FracScheme(FracOrder order, const TimeGrid& grid);

    /// Coefficient of the newest sample in the discrete Caputo derivative.
    double leading() const { return weights.front() * inv_step_pow; }
};

TimeSeries rl_integral_forward(const TimeSeries& h, double beta);
TimeSeries rl_integral_backward(const TimeSeries& h, double beta);

/// Treatment of the first second difference when alpha > 1.
///  CentralGhost: factor 2, i.e. h_{-1} = h_1 - 2 step h'(0). Exact on quadratics.
///  Conservative: factor 1, i.e. h_{-1} = h_0 - step h'(0). The second
///    differences telescope to h_n - h_{n-1} - step h'(0), which keeps the
///    t^alpha start of solutions first-order accurate away from t = 0.
enum class FirstStep { CentralGhost, Conservative };

double first_step_factor(FirstStep rule);

/// Discrete Caputo derivative. For alpha > 1 the initial slope h'(0) enters
/// the first second difference; it defaults to the homogeneous value 0.
TimeSeries caputo_forward(const TimeSeries& h, FracOrder order, double initial_slope = 0.0,
                          FirstStep rule = FirstStep::CentralGhost);

/// Forward Riemann-Liouville derivative d^m/dt^m J^(m-alpha) with backward differences.
TimeSeries rl_derivative_forward(const TimeSeries& h, FracOrder order);

/// Backward Riemann-Liouville derivative d^m/dt^m J_{T-}^(m-alpha), realised as
/// (-1)^m reverse(rl_derivative_forward(reverse(h))).
TimeSeries rl_derivative_backward(const TimeSeries& h, FracOrder order);

TimeSeries time_reverse(const TimeSeries& h);

}  // namespace fracmove
