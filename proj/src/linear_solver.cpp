#include "lppl/linear_solver.hpp"

#include "lppl/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace lppl {

namespace {

constexpr std::size_t kMaxColumns = 4;

const simd::KernelTable& table_of(const LinearSolverConfig& config) {
    return config.kernels != nullptr ? *config.kernels : simd::kernels();
}

void check_columns(std::span<const std::span<const double>> columns, std::span<const double> y) {
    if (columns.empty() || columns.size() > kMaxColumns)
        throw std::invalid_argument("least squares: between 1 and 4 columns required");
    if (y.size() < kMinObservations)
        throw std::invalid_argument("least squares: at least 5 observations required");
    for (const auto& c : columns)
        if (c.size() != y.size())
            throw std::invalid_argument("least squares: column length mismatch");
}

[[noreturn]] void throw_rank_deficient(double condition) {
    std::ostringstream msg;
    msg << "design matrix is rank deficient (condition diagnostic " << condition << ")";
    throw RankDeficientError(msg.str(), condition);
}

// Modified Gram-Schmidt with one reorthogonalization pass on unit-norm columns.
LinearSolution solve_orthogonal(std::span<const std::span<const double>> columns,
                                std::span<const double> y, const LinearSolverConfig& config) {
    const auto& k = table_of(config);
    const std::size_t n = y.size();
    const std::size_t p = columns.size();

    std::array<double, kMaxColumns> norms{};
    std::array<std::array<double, kMaxColumns>, kMaxColumns> R{};
    std::vector<double> Q(p * n);
    auto q = [&](std::size_t j) { return Q.data() + j * n; };

    for (std::size_t j = 0; j < p; ++j) {
        norms[j] = std::sqrt(k.dot(columns[j].data(), columns[j].data(), n));
        if (!(norms[j] > 0.0) || !std::isfinite(norms[j]))
            throw_rank_deficient(std::numeric_limits<double>::infinity());
        std::copy(columns[j].begin(), columns[j].end(), q(j));
        k.scale(1.0 / norms[j], q(j), n);
    }

    double r_max = 0.0;
    double r_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                const double rij = k.dot(q(i), q(j), n);
                R[i][j] += rij;
                k.axpy(-rij, q(i), q(j), n);
            }
        }
        const double rjj = std::sqrt(k.dot(q(j), q(j), n));
        R[j][j] = rjj;
        r_max = std::max(r_max, rjj);
        r_min = std::min(r_min, rjj);
        if (!(rjj > 0.0)) throw_rank_deficient(std::numeric_limits<double>::infinity());
        k.scale(1.0 / rjj, q(j), n);
    }
    const double condition = r_max / r_min;
    if (!(condition <= config.max_condition)) throw_rank_deficient(condition);

    std::vector<double> residual(y.begin(), y.end());
    std::array<double, kMaxColumns> z{};
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < p; ++j) {
            const double zj = k.dot(q(j), residual.data(), n);
            z[j] += zj;
            k.axpy(-zj, q(j), residual.data(), n);
        }
    }

    LinearSolution out;
    out.coefficients.assign(p, 0.0);
    for (std::size_t jj = p; jj-- > 0;) {
        double acc = z[jj];
        for (std::size_t i = jj + 1; i < p; ++i) acc -= R[jj][i] * out.coefficients[i];
        out.coefficients[jj] = acc / R[jj][jj];
    }
    for (std::size_t j = 0; j < p; ++j) out.coefficients[j] /= norms[j];
    out.sum_squared_residuals = k.dot(residual.data(), residual.data(), n);
    out.condition_diagnostic = condition;
    return out;
}

// Normal equations: form X^T X and X^T y, LU with partial pivoting.
LinearSolution solve_normal_lu(std::span<const std::span<const double>> columns,
                               std::span<const double> y, const LinearSolverConfig& config) {
    const auto& k = table_of(config);
    const std::size_t n = y.size();
    const std::size_t p = columns.size();

    std::array<std::array<double, kMaxColumns>, kMaxColumns> G{};
    std::array<double, kMaxColumns> b{};
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            G[i][j] = k.dot(columns[i].data(), columns[j].data(), n);
            G[j][i] = G[i][j];
        }
        b[i] = k.dot(columns[i].data(), y.data(), n);
        if (!(G[i][i] > 0.0) || !std::isfinite(G[i][i]))
            throw_rank_deficient(std::numeric_limits<double>::infinity());
    }

    // Unit-diagonal scaling so the pivot ratio is comparable across columns.
    std::array<double, kMaxColumns> s{};
    for (std::size_t i = 0; i < p; ++i) s[i] = 1.0 / std::sqrt(G[i][i]);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) G[i][j] *= s[i] * s[j];
        b[i] *= s[i];
    }

    std::array<std::size_t, kMaxColumns> perm{0, 1, 2, 3};
    double u_max = 0.0;
    double u_min = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < p; ++r)
            if (std::abs(G[r][c]) > std::abs(G[pivot][c])) pivot = r;
        std::swap(G[c], G[pivot]);
        std::swap(b[c], b[pivot]);
        std::swap(perm[c], perm[pivot]);
        const double d = G[c][c];
        u_max = std::max(u_max, std::abs(d));
        u_min = std::min(u_min, std::abs(d));
        // the scaled Gram matrix has unit diagonal, so a pivot this small is
        // rounding noise and the true condition cannot be resolved
        if (!(std::abs(d) > 16.0 * p * std::numeric_limits<double>::epsilon()))
            throw_rank_deficient(std::numeric_limits<double>::infinity());
        for (std::size_t r = c + 1; r < p; ++r) {
            const double factor = G[r][c] / d;
            for (std::size_t cc = c; cc < p; ++cc) G[r][cc] -= factor * G[c][cc];
            b[r] -= factor * b[c];
        }
    }
    // Gram pivots scale like squared singular values.
    const double condition = std::sqrt(u_max / u_min);
    if (!(condition <= config.max_condition)) throw_rank_deficient(condition);

    std::array<double, kMaxColumns> x{};
    for (std::size_t r = p; r-- > 0;) {
        double acc = b[r];
        for (std::size_t cc = r + 1; cc < p; ++cc) acc -= G[r][cc] * x[cc];
        x[r] = acc / G[r][r];
    }

    LinearSolution out;
    out.coefficients.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) out.coefficients[j] = x[j] * s[j];

    std::vector<double> r(y.begin(), y.end());
    for (std::size_t j = 0; j < p; ++j) k.axpy(-out.coefficients[j], columns[j].data(), r.data(), n);
    out.sum_squared_residuals = k.dot(r.data(), r.data(), n);
    out.condition_diagnostic = condition;
    return out;
}

}  // namespace

std::vector<double> log_time_to_critical(std::span<const double> times, double tc,
                                         const simd::KernelTable& kernels) {
    std::vector<double> dt(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        dt[i] = tc - times[i];
        if (!(dt[i] >= kMinTimeToCritical)) {
            std::ostringstream msg;
            msg << "critical time " << tc << " does not lie beyond observation time " << times[i];
            throw DomainError(msg.str());
        }
    }
    std::vector<double> out(times.size());
    kernels.log(dt.data(), dt.size(), out.data());
    return out;
}

void fill_basis(std::span<const double> log_dt, std::span<const double> log_price, double m,
                double omega, BasisColumns& out, const simd::KernelTable& kernels) {
    const std::size_t n = log_dt.size();
    if (log_price.size() != n) throw std::invalid_argument("basis: length mismatch");
    out.y.assign(log_price.begin(), log_price.end());
    out.ones.assign(n, 1.0);
    out.f.resize(n);
    out.g.resize(n);
    out.h.resize(n);
    out.log_dt.assign(log_dt.begin(), log_dt.end());
    out.m = m;
    out.omega = omega;
    kernels.power_log_periodic(log_dt.data(), n, m, omega, out.f.data(), out.g.data(),
                               out.h.data());
}

BasisColumns build_basis(std::span<const double> times, std::span<const double> log_price,
                         double tc, double m, double omega, const simd::KernelTable& kernels) {
    if (times.size() != log_price.size()) throw std::invalid_argument("basis: length mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("basis: observation times must be strictly increasing");
    const auto log_dt = log_time_to_critical(times, tc, kernels);
    BasisColumns basis;
    fill_basis(log_dt, log_price, m, omega, basis, kernels);
    return basis;
}

LinearSolution solve_least_squares(std::span<const std::span<const double>> columns,
                                   std::span<const double> y, const LinearSolverConfig& config) {
    check_columns(columns, y);
    switch (config.method) {
        case LinearMethod::Orthogonal: return solve_orthogonal(columns, y, config);
        case LinearMethod::NormalEquationsLu: return solve_normal_lu(columns, y, config);
    }
    throw std::invalid_argument("unknown linear method");
}

LinearSolution solve_linear4(const BasisColumns& basis, const LinearSolverConfig& config) {
    const std::array<std::span<const double>, 4> columns{basis.ones, basis.f, basis.g, basis.h};
    return solve_least_squares(columns, basis.y, config);
}

LinearSolution solve_linear3(const BasisColumns& basis, double phi,
                             const LinearSolverConfig& config) {
    const std::size_t n = basis.size();
    if (basis.log_dt.size() != n) throw std::invalid_argument("basis: missing log times");
    std::vector<double> f(n), g(n);
    table_of(config).power_log_periodic_phase(basis.log_dt.data(), n, basis.m, basis.omega, phi,
                                              f.data(), g.data());
    const std::array<std::span<const double>, 3> columns{basis.ones, f, g};
    return solve_least_squares(columns, basis.y, config);
}

double normal_equation_residual(std::span<const std::span<const double>> columns,
                                std::span<const double> y,
                                std::span<const double> coefficients) {
    const std::size_t n = y.size();
    std::vector<long double> r(y.begin(), y.end());
    for (std::size_t j = 0; j < columns.size(); ++j)
        for (std::size_t i = 0; i < n; ++i)
            r[i] -= static_cast<long double>(coefficients[j]) * columns[j][i];

    long double y_norm = 0.0L;
    for (double v : y) y_norm += static_cast<long double>(v) * v;
    y_norm = std::sqrt(y_norm);

    double worst = 0.0;
    for (const auto& c : columns) {
        long double grad = 0.0L, c_norm = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            grad += static_cast<long double>(c[i]) * r[i];
            c_norm += static_cast<long double>(c[i]) * c[i];
        }
        const long double denom = std::sqrt(c_norm) * y_norm;
        if (denom > 0.0L) worst = std::max(worst, static_cast<double>(std::abs(grad) / denom));
    }
    return worst;
}

double cost_F(std::span<const double> times, std::span<const double> log_price, double tc,
              double m, double omega, double A, double B, double C1, double C2) {
    if (times.empty()) throw std::invalid_argument("cost_F: empty window");
    const auto& k = simd::kernels();
    const BasisColumns basis = build_basis(times, log_price, tc, m, omega, k);
    return k.residual_ss(basis.y.data(), basis.f.data(), basis.g.data(), basis.h.data(),
                         basis.size(), A, B, C1, C2);
}

}  // namespace lppl
