#include "l2sk/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace l2sk::simd {

namespace {

constexpr KernelSet kScalar{"scalar", &flow_batch_scalar, &flow_tangent_scalar};

#if defined(L2SK_BUILD_AVX2)
constexpr KernelSet kAvx2{"avx2", &flow_batch_avx2, &flow_tangent_avx2};
bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}
#endif

#if defined(L2SK_BUILD_NEON)
constexpr KernelSet kNeon{"neon", &flow_batch_neon, &flow_tangent_neon};
#endif

KernelSet pick() {
    const char* force = std::getenv("L2SK_SIMD");
    if (force != nullptr) {
        if (std::strcmp(force, "scalar") == 0) return kScalar;
#if defined(L2SK_BUILD_AVX2)
        if (std::strcmp(force, "avx2") == 0 && cpu_has_avx2()) return kAvx2;
#endif
#if defined(L2SK_BUILD_NEON)
        if (std::strcmp(force, "neon") == 0) return kNeon;
#endif
        return kScalar;
    }
#if defined(L2SK_BUILD_AVX2)
    if (cpu_has_avx2()) return kAvx2;
#endif
#if defined(L2SK_BUILD_NEON)
    return kNeon;
#endif
    return kScalar;
}

} // namespace

const KernelSet& active_kernels() {
    static const KernelSet ks = pick();
    return ks;
}

std::vector<KernelSet> available_kernels() {
    std::vector<KernelSet> out{kScalar};
#if defined(L2SK_BUILD_AVX2)
    if (cpu_has_avx2()) out.push_back(kAvx2);
#endif
#if defined(L2SK_BUILD_NEON)
    out.push_back(kNeon);
#endif
    return out;
}

} // namespace l2sk::simd
