#pragma once

// Data-parallel inner loops of the calibration. Every kernel has a scalar
// reference implementation; wider variants are picked at runtime from the
// CPU feature set and must agree with the reference to a few ulps.
//
// kernels_for() selects a variant explicitly (the CLI exposes this as --kernels).

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace lppl::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    const char* name;

    /// out[i] = ln(x[i]); x[i] > 0.
    void (*log)(const double* x, std::size_t n, double* out);

    /// f = exp(m L), g = f cos(w L), h = f sin(w L) where L = log_dt.
    void (*power_log_periodic)(const double* log_dt, std::size_t n, double m, double omega,
                               double* f, double* g, double* h);

    /// f = exp(m L), g = f cos(w L - phi).
    void (*power_log_periodic_phase)(const double* log_dt, std::size_t n, double m, double omega,
                                     double phi, double* f, double* g);

    double (*dot)(const double* a, const double* b, std::size_t n);

    double (*sum)(const double* a, std::size_t n);

    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    /// x *= alpha
    void (*scale)(double alpha, double* x, std::size_t n);

    /// sum_i (y_i - c0 - c1 f_i - c2 g_i - c3 h_i)^2 ; h may be null (c3 ignored).
    double (*residual_ss)(const double* y, const double* f, const double* g, const double* h,
                          std::size_t n, double c0, double c1, double c2, double c3);
};

/// Kernel table chosen for this process (resolved once, thread-safe).
const KernelTable& kernels();

/// Table for a specific variant; throws std::runtime_error when the variant
/// was not compiled in or the CPU lacks the instructions.
const KernelTable& kernels_for(Isa isa);

bool isa_available(Isa isa);

std::vector<Isa> available_isas();

std::string_view isa_name(Isa isa);

namespace detail {
const KernelTable& scalar_table();
#if defined(LPPL_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace lppl::simd
