#include "fracmove/fraccalc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracmove/errors.hpp"

namespace fracmove {

TimeGrid::TimeGrid(double t_final, std::size_t n_steps)
    : t_final_(t_final), n_steps_(n_steps), step_(t_final / static_cast<double>(n_steps)) {
    if (!(t_final > 0.0) || !std::isfinite(t_final)) {
        throw DomainError("TimeGrid: t_final must be positive and finite");
    }
    if (n_steps < 2) throw SizeError("TimeGrid: need at least 2 steps");
}

FracOrder::FracOrder(double alpha) : alpha_(alpha), ceil_(alpha <= 1.0 ? 1 : 2) {
    if (!(alpha > 0.0) || alpha > 2.0) {
        throw DomainError("FracOrder: alpha must lie in (0, 2], got " + std::to_string(alpha));
    }
}

TimeSeries::TimeSeries(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n_nodes()) {
        throw SizeError("TimeSeries: expected " + std::to_string(grid.n_nodes()) + " samples, got " +
                        std::to_string(values.size()));
    }
}

TimeSeries::TimeSeries(TimeGrid g) : grid(g), values(g.n_nodes(), 0.0) {}

std::vector<double> rl_weights(double beta, double step, std::size_t count) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw DomainError("rl_weights: beta must lie in [0, 1], got " + std::to_string(beta));
    }
    std::vector<double> w(count, 0.0);
    if (count == 0) return w;
    if (beta == 0.0) {
        w[0] = 1.0;
        return w;
    }
    const double scale = std::pow(step, beta) / std::tgamma(beta + 1.0);
    double prev = 0.0;  // k^beta
    for (std::size_t k = 0; k < count; ++k) {
        const double next = std::pow(static_cast<double>(k + 1), beta);
        w[k] = scale * (next - prev);
        prev = next;
    }
    return w;
}

FracScheme::FracScheme(FracOrder ord, const TimeGrid& grid)
    : order(ord),
      step(grid.step()),
      weights(rl_weights(ord.integral_order(), grid.step(), grid.n_steps())),
      inv_step_pow(1.0 / std::pow(grid.step(), ord.ceil())) {}

namespace {

// (J h)_n = sum_{j=1..n} w_{n-j} x_j with x supplied separately from the grid.
std::vector<double> convolve_right(const std::vector<double>& w, const std::vector<double>& x) {
    const std::size_t n_nodes = x.size();
    std::vector<double> out(n_nodes, 0.0);
    for (std::size_t n = 1; n < n_nodes; ++n) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= n; ++j) acc += w[n - j] * x[j];
        out[n] = acc;
    }
    return out;
}

void check_beta(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw DomainError("RL integral: beta must lie in [0, 1], got " + std::to_string(beta));
    }
}

void check_length(const TimeSeries& h, FracOrder order) {
    if (h.size() < static_cast<std::size_t>(order.ceil()) + 2) {
        throw SizeError("fractional derivative: series too short for order " +
                        std::to_string(order.alpha()));
    }
}

}  // namespace

TimeSeries time_reverse(const TimeSeries& h) {
    std::vector<double> v(h.values.rbegin(), h.values.rend());
    return TimeSeries(h.grid, std::move(v));
}

TimeSeries rl_integral_forward(const TimeSeries& h, double beta) {
    check_beta(beta);
    if (beta == 0.0) return h;
    const auto w = rl_weights(beta, h.grid.step(), h.grid.n_steps());
    return TimeSeries(h.grid, convolve_right(w, h.values));
}

TimeSeries rl_integral_backward(const TimeSeries& h, double beta) {
    check_beta(beta);
    if (beta == 0.0) return h;
    return time_reverse(rl_integral_forward(time_reverse(h), beta));
}

double first_step_factor(FirstStep rule) { return rule == FirstStep::CentralGhost ? 2.0 : 1.0; }

TimeSeries caputo_forward(const TimeSeries& h, FracOrder order, double initial_slope, FirstStep rule) {
    check_length(h, order);
    const std::size_t n_nodes = h.size();
    const double tau = h.grid.step();
    const auto& x = h.values;

    // m-th backward differences e_j, j >= 1 (e_0 unused).
    std::vector<double> e(n_nodes, 0.0);
    if (order.ceil() == 1) {
        for (std::size_t j = 1; j < n_nodes; ++j) e[j] = x[j] - x[j - 1];
    } else {
        const double k = first_step_factor(rule);
        double prev = tau * initial_slope;
        for (std::size_t j = 1; j < n_nodes; ++j) {
            const double d = x[j] - x[j - 1];
            e[j] = j == 1 ? k * (d - prev) : d - prev;
            prev = d;
        }
    }
    const FracScheme scheme(order, h.grid);
    auto out = convolve_right(scheme.weights, e);
    for (auto& v : out) v *= scheme.inv_step_pow;
    return TimeSeries(h.grid, std::move(out));
}

TimeSeries rl_derivative_forward(const TimeSeries& h, FracOrder order) {
    check_length(h, order);
    const auto g = rl_integral_forward(h, order.integral_order()).values;
    const double tau = h.grid.step();
    std::vector<double> out(g.size(), 0.0);
    if (order.ceil() == 1) {
        for (std::size_t n = 1; n < g.size(); ++n) out[n] = (g[n] - g[n - 1]) / tau;
    } else {
        // Constant extension before t = 0: g_{-1} = g_0.
        out[1] = (g[1] - g[0]) / (tau * tau);
        for (std::size_t n = 2; n < g.size(); ++n) {
            out[n] = ((g[n] - g[n - 1]) - (g[n - 1] - g[n - 2])) / (tau * tau);
        }
    }
    return TimeSeries(h.grid, std::move(out));
}

TimeSeries rl_derivative_backward(const TimeSeries& h, FracOrder order) {
    auto out = time_reverse(rl_derivative_forward(time_reverse(h), order));
    if (order.ceil() % 2 == 1) {
        for (auto& v : out.values) v = -v;
    }
    return out;
}

}  // namespace fracmove
