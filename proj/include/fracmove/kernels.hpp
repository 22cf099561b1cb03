#pragma once

// Data-parallel inner loops shared by every solver.
//
// Each kernel has a scalar reference implementation and vector variants
// (AVX2 on x86-64, NEON on aarch64). Variants are selected once at runtime
// from CPU features and may be overridden with FRACMOVE_SIMD=scalar|avx2|neon.
// All variants perform the same floating-point operations in the same order,
// so results are bit-identical across variants; the equivalence tests rely
// on this.

#include <cstddef>
#include <span>
#include <string_view>

namespace fracmove::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
    const char* name;
    // y[i] += a * x[i]
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
    // y[i] += sum_j coeffs[j] * rows[j][i], summed in increasing j
    void (*accumulate)(double* y, const double* coeffs, const double* const* rows,
                       std::size_t nrows, std::size_t n);
    // sum_i x[i] * y[i] with four interleaved partial sums
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum_i w[i] * x[i] * y[i] with four interleaved partial sums
    double (*weighted_dot)(const double* x, const double* y, const double* w, std::size_t n);
    // out[i] = ((c[i-1] + c[i+1]) - 2 c[i]) * ihx2 + ((up[i] + down[i]) - 2 c[i]) * ihy2
    // for i in [0, n); c must be readable at c[-1] and c[n].
    void (*stencil5_row)(double* out, const double* c, const double* up, const double* down,
                         std::size_t n, double ihx2, double ihy2);
};

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable* avx2_table();  // nullptr when not compiled in
#endif
#if defined(__aarch64__)
const KernelTable* neon_table();
#endif

/// Whether the given variant is compiled in and supported by this CPU.
bool available(Isa isa);

/// Variant used by the free functions below.
Isa active_isa();
std::string_view isa_name(Isa isa);

/// Force a variant (tests and benchmarks). Throws if unavailable.
void set_active_isa(Isa isa);

const KernelTable& table(Isa isa);
const KernelTable& active();

inline void axpy(std::span<double> y, double a, std::span<const double> x) {
    active().axpy(y.data(), a, x.data(), y.size());
}

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}

inline double weighted_dot(std::span<const double> x, std::span<const double> y,
                           std::span<const double> w) {
    return active().weighted_dot(x.data(), y.data(), w.data(), x.size());
}

inline void accumulate(std::span<double> y, std::span<const double> coeffs,
                       std::span<const double* const> rows) {
    active().accumulate(y.data(), coeffs.data(), rows.data(), rows.size(), y.size());
}

}  // namespace fracmove::kernels
