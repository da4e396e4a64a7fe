#include "lppl/simd.hpp"

#include <stdexcept>
#include <string>

namespace lppl::simd {

namespace {

bool cpu_has_avx2() {
#if defined(LPPL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& resolve() {
    if (isa_available(Isa::Avx2)) return kernels_for(Isa::Avx2);
    return detail::scalar_table();
}

}  // namespace

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2: {
            static const bool has = cpu_has_avx2();
            return has;
        }
    }
    return false;
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::Scalar};
    if (isa_available(Isa::Avx2)) out.push_back(Isa::Avx2);
    return out;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

const KernelTable& kernels_for(Isa isa) {
    if (!isa_available(isa))
        throw std::runtime_error("kernel variant not available: " + std::string(isa_name(isa)));
    switch (isa) {
        case Isa::Scalar: return detail::scalar_table();
        case Isa::Avx2:
#if defined(LPPL_HAVE_AVX2)
            return detail::avx2_table();
#else
            break;
#endif
    }
    throw std::runtime_error("kernel variant not compiled in");
}

const KernelTable& kernels() {
    static const KernelTable& table = resolve();
    return table;
}

}  // namespace lppl::simd
