#include "fracmove/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace fracmove::kernels {
namespace {

// Multiplies and adds are issued separately (no FMA) to reproduce the
// scalar rounding sequence exactly.

void axpy_avx2(double* y, double a, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void accumulate_avx2(double* y, const double* coeffs, const double* const* rows,
                     std::size_t nrows, std::size_t n) {
    // Four vectors of y are kept in registers while streaming all rows.
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        __m256d y0 = _mm256_loadu_pd(y + i);
        __m256d y1 = _mm256_loadu_pd(y + i + 4);
        __m256d y2 = _mm256_loadu_pd(y + i + 8);
        __m256d y3 = _mm256_loadu_pd(y + i + 12);
        for (std::size_t j = 0; j < nrows; ++j) {
            const __m256d c = _mm256_set1_pd(coeffs[j]);
            const double* r = rows[j] + i;
            y0 = _mm256_add_pd(y0, _mm256_mul_pd(c, _mm256_loadu_pd(r)));
            y1 = _mm256_add_pd(y1, _mm256_mul_pd(c, _mm256_loadu_pd(r + 4)));
            y2 = _mm256_add_pd(y2, _mm256_mul_pd(c, _mm256_loadu_pd(r + 8)));
            y3 = _mm256_add_pd(y3, _mm256_mul_pd(c, _mm256_loadu_pd(r + 12)));
        }
        _mm256_storeu_pd(y + i, y0);
        _mm256_storeu_pd(y + i + 4, y1);
        _mm256_storeu_pd(y + i + 8, y2);
        _mm256_storeu_pd(y + i + 12, y3);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_loadu_pd(y + i);
        for (std::size_t j = 0; j < nrows; ++j) {
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(coeffs[j]),
                                                   _mm256_loadu_pd(rows[j] + i)));
        }
        _mm256_storeu_pd(y + i, acc);
    }
    for (; i < n; ++i) {
        double acc = y[i];
        for (std::size_t j = 0; j < nrows; ++j) acc = acc + coeffs[j] * rows[j][i];
        y[i] = acc;
    }
}

double reduce_lanes(__m256d v) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    double s = reduce_lanes(acc);
    for (; i < n; ++i) s = s + x[i] * y[i];
    return s;
}

double weighted_dot_avx2(const double* x, const double* y, const double* w, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(wx, _mm256_loadu_pd(y + i)));
    }
    double s = reduce_lanes(acc);
    for (; i < n; ++i) s = s + (w[i] * x[i]) * y[i];
    return s;
}

void stencil5_row_avx2(double* out, const double* c, const double* up, const double* down,
                       std::size_t n, double ihx2, double ihy2) {
    const __m256d vx = _mm256_set1_pd(ihx2);
    const __m256d vy = _mm256_set1_pd(ihy2);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d two_c = _mm256_mul_pd(two, _mm256_loadu_pd(c + i));
        const __m256d tx = _mm256_sub_pd(
            _mm256_add_pd(_mm256_loadu_pd(c + i - 1), _mm256_loadu_pd(c + i + 1)), two_c);
        const __m256d ty = _mm256_sub_pd(
            _mm256_add_pd(_mm256_loadu_pd(up + i), _mm256_loadu_pd(down + i)), two_c);
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(tx, vx), _mm256_mul_pd(ty, vy)));
    }
    for (; i < n; ++i) {
        const double two_c = 2.0 * c[i];
        const double tx = (c[i - 1] + c[i + 1]) - two_c;
        const double ty = (up[i] + down[i]) - two_c;
        out[i] = tx * ihx2 + ty * ihy2;
    }
}

const KernelTable kAvx2{
    "avx2", axpy_avx2, accumulate_avx2, dot_avx2, weighted_dot_avx2, stencil5_row_avx2,
};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace fracmove::kernels
