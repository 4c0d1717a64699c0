#include "sepnet/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace sepnet::kernels {

#if defined(SEPNET_HAVE_AVX2)
namespace detail {
const KernelTable& avx2_table();
}
#endif

const KernelTable* avx2() {
#if defined(SEPNET_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable& chosen = [] () -> const KernelTable& {
        const char* force = std::getenv("SEPNET_SIMD");
        if (force && std::string_view(force) == "scalar") return scalar();
        if (const KernelTable* t = avx2()) return *t;
        return scalar();
    }();
    return chosen;
}

} // namespace sepnet::kernels
