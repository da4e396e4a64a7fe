#pragma once

// Linear subproblem of the LPPL fit. For fixed (t_c, m, omega) the model is
// linear in (A, B, C1, C2); in the phase form with fixed phi it is linear in
// (A, B, C). Both are solved here as small dense least-squares problems.

#include "lppl/simd.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace lppl {

class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Minimum observation count: one more than the number of linear parameters.
inline constexpr std::size_t kMinObservations = 5;

/// Design columns for one (t_c, m, omega) triple.
struct BasisColumns {
    std::vector<double> y;       ///< log-prices
    std::vector<double> ones;
    std::vector<double> f;       ///< (t_c - tau)^m
    std::vector<double> g;       ///< f cos(w ln(t_c - tau))
    std::vector<double> h;       ///< f sin(w ln(t_c - tau))
    std::vector<double> log_dt;  ///< ln(t_c - tau), kept for the phase rebuild
    double m = 0.0;
    double omega = 0.0;

    std::size_t size() const noexcept { return y.size(); }
};

struct LinearSolution {
    std::vector<double> coefficients;  ///< (A, B, C1, C2) or (A, B, C)
    double sum_squared_residuals = 0.0;
    double condition_diagnostic = 1.0;
};

enum class LinearMethod {
    Orthogonal,         ///< Gram-Schmidt QR of the column-scaled design matrix
    NormalEquationsLu,  ///< normal equations + LU with partial pivoting
};

struct LinearSolverConfig {
    LinearMethod method = LinearMethod::Orthogonal;
    double max_condition = 1e12;
    /// Kernel variant; null selects the process default.
    const simd::KernelTable* kernels = nullptr;
};

/// ln(t_c - tau_i) for every observation time. Throws DomainError when
/// t_c <= max(times) + kMinTimeToCritical.
std::vector<double> log_time_to_critical(std::span<const double> times, double tc,
                                         const simd::KernelTable& kernels = simd::kernels());

BasisColumns build_basis(std::span<const double> times, std::span<const double> log_price,
                         double tc, double m, double omega,
                         const simd::KernelTable& kernels = simd::kernels());

/// Same as build_basis for a precomputed ln(t_c - tau); reuses `out`'s storage.
void fill_basis(std::span<const double> log_dt, std::span<const double> log_price, double m,
                double omega, BasisColumns& out,
                const simd::KernelTable& kernels = simd::kernels());

LinearSolution solve_linear4(const BasisColumns& basis, const LinearSolverConfig& config = {});

/// Legacy three-parameter solve with g rebuilt as f cos(w ln(t_c - tau) - phi).
LinearSolution solve_linear3(const BasisColumns& basis, double phi,
                             const LinearSolverConfig& config = {});

/// Least squares over arbitrary columns (1 to 4 of them).
LinearSolution solve_least_squares(std::span<const std::span<const double>> columns,
                                   std::span<const double> y,
                                   const LinearSolverConfig& config = {});

/// max_j |x_j . (y - X c)| / (||x_j|| ||y||): gradient of the quadratic cost
/// at `coefficients`, relative to the scale of the system.
double normal_equation_residual(std::span<const std::span<const double>> columns,
                                std::span<const double> y,
                                std::span<const double> coefficients);

/// Sum of squared residuals of the cartesian LPPL over the given observations.
double cost_F(std::span<const double> times, std::span<const double> log_price, double tc,
              double m, double omega, double A, double B, double C1, double C2);

}  // namespace lppl
