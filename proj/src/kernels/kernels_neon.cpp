#include "fracmove/kernels.hpp"

#include <arm_neon.h>

namespace fracmove::kernels {
namespace {

// Two float64x2 accumulators mirror the four interleaved scalar partial sums.

void axpy_neon(double* y, double a, const double* x, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void accumulate_neon(double* y, const double* coeffs, const double* const* rows,
                     std::size_t nrows, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float64x2_t y0 = vld1q_f64(y + i);
        float64x2_t y1 = vld1q_f64(y + i + 2);
        for (std::size_t j = 0; j < nrows; ++j) {
            const float64x2_t c = vdupq_n_f64(coeffs[j]);
            y0 = vaddq_f64(y0, vmulq_f64(c, vld1q_f64(rows[j] + i)));
            y1 = vaddq_f64(y1, vmulq_f64(c, vld1q_f64(rows[j] + i + 2)));
        }
        vst1q_f64(y + i, y0);
        vst1q_f64(y + i + 2, y1);
    }
    for (; i < n; ++i) {
        double acc = y[i];
        for (std::size_t j = 0; j < nrows; ++j) acc = acc + coeffs[j] * rows[j][i];
        y[i] = acc;
    }
}

double combine(float64x2_t lo, float64x2_t hi) {
    return (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
           (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
}

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
        hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
    }
    double s = combine(lo, hi);
    for (; i < n; ++i) s = s + x[i] * y[i];
    return s;
}

double weighted_dot_neon(const double* x, const double* y, const double* w, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t wx0 = vmulq_f64(vld1q_f64(w + i), vld1q_f64(x + i));
        const float64x2_t wx1 = vmulq_f64(vld1q_f64(w + i + 2), vld1q_f64(x + i + 2));
        lo = vaddq_f64(lo, vmulq_f64(wx0, vld1q_f64(y + i)));
        hi = vaddq_f64(hi, vmulq_f64(wx1, vld1q_f64(y + i + 2)));
    }
    double s = combine(lo, hi);
    for (; i < n; ++i) s = s + (w[i] * x[i]) * y[i];
    return s;
}

void stencil5_row_neon(double* out, const double* c, const double* up, const double* down,
                       std::size_t n, double ihx2, double ihy2) {
    const float64x2_t vx = vdupq_n_f64(ihx2);
    const float64x2_t vy = vdupq_n_f64(ihy2);
    const float64x2_t two = vdupq_n_f64(2.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t two_c = vmulq_f64(two, vld1q_f64(c + i));
        const float64x2_t tx = vsubq_f64(vaddq_f64(vld1q_f64(c + i - 1), vld1q_f64(c + i + 1)), two_c);
        const float64x2_t ty = vsubq_f64(vaddq_f64(vld1q_f64(up + i), vld1q_f64(down + i)), two_c);
        vst1q_f64(out + i, vaddq_f64(vmulq_f64(tx, vx), vmulq_f64(ty, vy)));
    }
    for (; i < n; ++i) {
        const double two_c = 2.0 * c[i];
        out[i] = ((c[i - 1] + c[i + 1]) - two_c) * ihx2 + ((up[i] + down[i]) - two_c) * ihy2;
    }
}

const KernelTable kNeon{
    "neon", axpy_neon, accumulate_neon, dot_neon, weighted_dot_neon, stencil5_row_neon,
};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace fracmove::kernels
