#include "kernels_impl.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dnnreg::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(DNNREG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const LayerKernels* initial_table() {
    Isa isa = best_available();
    if (const char* env = std::getenv("DNNREG_KERNEL"); env != nullptr && *env != '\0') {
        isa = parse_isa(env);
    }
    return &kernels_for(isa);
}

std::atomic<const LayerKernels*>& active_slot() {
    static std::atomic<const LayerKernels*> slot{initial_table()};
    return slot;
}

}  // namespace

const LayerKernels& scalar_kernels() { return detail::kScalarTable; }

const LayerKernels* avx2_kernels() {
#if defined(DNNREG_HAVE_AVX2)
    static const bool supported = cpu_has_avx2();
    return supported ? &detail::kAvx2Table : nullptr;
#else
    return nullptr;
#endif
}

bool available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return avx2_kernels() != nullptr;
    }
    return false;
}

Isa best_available() { return available(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

const LayerKernels& kernels_for(Isa isa) {
    if (isa == Isa::avx2) {
        if (const LayerKernels* t = avx2_kernels()) return *t;
        throw std::runtime_error("avx2 kernels are not available on this machine");
    }
    return scalar_kernels();
}

const LayerKernels& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_release); }

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    if (name == "auto") return best_available();
    throw std::invalid_argument("unknown kernel '" + std::string(name) + "' (scalar|avx2|auto)");
}

}  // namespace dnnreg::kernels
