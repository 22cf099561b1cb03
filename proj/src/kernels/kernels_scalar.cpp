#include "fracmove/kernels.hpp"

#include <algorithm>

namespace fracmove::kernels {
namespace {

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void accumulate_scalar(double* y, const double* coeffs, const double* const* rows,
                       std::size_t nrows, std::size_t n) {
    // Blocked so each row segment stays in cache; per-element order is j = 0..nrows-1.
    constexpr std::size_t block = 256;
    for (std::size_t i0 = 0; i0 < n; i0 += block) {
        const std::size_t i1 = std::min(n, i0 + block);
        for (std::size_t j = 0; j < nrows; ++j) {
            const double c = coeffs[j];
            const double* r = rows[j];
            for (std::size_t i = i0; i < i1; ++i) y[i] = y[i] + c * r[i];
        }
    }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 = s0 + x[i] * y[i];
        s1 = s1 + x[i + 1] * y[i + 1];
        s2 = s2 + x[i + 2] * y[i + 2];
        s3 = s3 + x[i + 3] * y[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s = s + x[i] * y[i];
    return s;
}

double weighted_dot_scalar(const double* x, const double* y, const double* w, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 = s0 + (w[i] * x[i]) * y[i];
        s1 = s1 + (w[i + 1] * x[i + 1]) * y[i + 1];
        s2 = s2 + (w[i + 2] * x[i + 2]) * y[i + 2];
        s3 = s3 + (w[i + 3] * x[i + 3]) * y[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s = s + (w[i] * x[i]) * y[i];
    return s;
}

void stencil5_row_scalar(double* out, const double* c, const double* up, const double* down,
                         std::size_t n, double ihx2, double ihy2) {
    for (std::size_t i = 0; i < n; ++i) {
        const double two_c = 2.0 * c[i];
        const double tx = (c[i - 1] + c[i + 1]) - two_c;
        const double ty = (up[i] + down[i]) - two_c;
        out[i] = tx * ihx2 + ty * ihy2;
    }
}

const KernelTable kScalar{
    "scalar", axpy_scalar, accumulate_scalar, dot_scalar, weighted_dot_scalar, stencil5_row_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace fracmove::kernels
