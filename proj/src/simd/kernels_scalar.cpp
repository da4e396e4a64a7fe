#include "lppl/simd.hpp"

#include <cmath>

namespace lppl::simd {
namespace {

void log_scalar(const double* x, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::log(x[i]);
}

void power_log_periodic_scalar(const double* log_dt, std::size_t n, double m, double omega,
                               double* f, double* g, double* h) {
    for (std::size_t i = 0; i < n; ++i) {
        const double power = std::exp(m * log_dt[i]);
        const double arg = omega * log_dt[i];
        f[i] = power;
        g[i] = power * std::cos(arg);
        h[i] = power * std::sin(arg);
    }
}

void power_log_periodic_phase_scalar(const double* log_dt, std::size_t n, double m,
                                     double omega, double phi, double* f, double* g) {
    for (std::size_t i = 0; i < n; ++i) {
        const double power = std::exp(m * log_dt[i]);
        f[i] = power;
        g[i] = power * std::cos(omega * log_dt[i] - phi);
    }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double residual_ss_scalar(const double* y, const double* f, const double* g, const double* h,
                          std::size_t n, double c0, double c1, double c2, double c3) {
    double acc = 0.0;
    if (h == nullptr) {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - c0 - c1 * f[i] - c2 * g[i];
            acc += r * r;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - c0 - c1 * f[i] - c2 * g[i] - c3 * h[i];
            acc += r * r;
        }
    }
    return acc;
}

constexpr KernelTable kScalarTable{
    Isa::Scalar,
    "scalar",
    log_scalar,
    power_log_periodic_scalar,
    power_log_periodic_phase_scalar,
    dot_scalar,
    sum_scalar,
    axpy_scalar,
    scale_scalar,
    residual_ss_scalar,
};

}  // namespace

const KernelTable& detail::scalar_table() { return kScalarTable; }

}  // namespace lppl::simd
