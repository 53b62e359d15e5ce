#include "tempo/kernels/kernels.hpp"

#include <cstdlib>
#include <string>

namespace tempo::kernels {

#if defined(TEMPO_HAVE_AVX2)
const KernelTable& avx2_kernels_impl();
#endif

const KernelTable* avx2_table() {
#if defined(TEMPO_HAVE_AVX2)
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    if (supported) return &avx2_kernels_impl();
#endif
    return nullptr;
}

const KernelTable& active() {
    static const KernelTable& table = []() -> const KernelTable& {
        if (const char* env = std::getenv("TEMPO_SIMD"); env && std::string(env) == "scalar")
            return scalar_table();
        if (const KernelTable* t = avx2_table()) return *t;
        return scalar_table();
    }();
    return table;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

} // namespace tempo::kernels
