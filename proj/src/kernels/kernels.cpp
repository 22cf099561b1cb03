#include "fracmove/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fracmove::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(FRACMOVE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("FRACMOVE_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return Isa::Scalar;
        if (want == "avx2" && available(Isa::Avx2)) return Isa::Avx2;
        if (want == "neon" && available(Isa::Neon)) return Isa::Neon;
    }
    if (available(Isa::Avx2)) return Isa::Avx2;
    if (available(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

bool available(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(FRACMOVE_HAVE_AVX2)
            return cpu_has_avx2();
#else
            return false;
#endif
        case Isa::Neon:
#if defined(FRACMOVE_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable& table(Isa isa) {
    if (!available(isa)) {
        throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
    }
    switch (isa) {
#if defined(FRACMOVE_HAVE_AVX2)
        case Isa::Avx2: return *avx2_table();
#endif
#if defined(FRACMOVE_HAVE_NEON)
        case Isa::Neon: return *neon_table();
#endif
        default: return scalar_table();
    }
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!available(isa)) {
        throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
    }
    current().store(isa, std::memory_order_relaxed);
}

const KernelTable& active() {
    // Cached per variant; table() validates availability.
    switch (active_isa()) {
#if defined(FRACMOVE_HAVE_AVX2)
        case Isa::Avx2: return *avx2_table();
#endif
#if defined(FRACMOVE_HAVE_NEON)
        case Isa::Neon: return *neon_table();
#endif
        default: return scalar_table();
    }
}

}  // namespace fracmove::kernels
