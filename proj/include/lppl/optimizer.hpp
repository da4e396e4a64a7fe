#pragma once

// Derivative-free local search (Nelder-Mead) and a seeded multi-start driver
// that clusters converged points into distinct local minima.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lppl {

using Objective = std::function<double(std::span<const double>)>;

/// Value substituted wherever the objective is undefined or non-finite.
inline constexpr double kPenaltyValue = 1e300;

struct SearchBox {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dims() const noexcept { return lower.size(); }
    double width(std::size_t i) const { return upper[i] - lower[i]; }
    /// Throws std::invalid_argument unless lower < upper in every dimension.
    void validate() const;
    bool contains(std::span<const double> x) const;
};

struct OptimizerConfig {
    int max_iterations = 2000;
    double x_tolerance = 1e-8;   ///< simplex size (max vertex distance from best, per axis)
    double f_tolerance = 1e-10;  ///< relative spread of simplex values
    int n_starts = 20;
    std::uint64_t rng_seed = 0;
    std::vector<double> cluster_tolerance;  ///< per dimension; empty = 1% of box width
    double initial_step_fraction = 0.05;    ///< initial simplex edge as a fraction of box width
    int restarts = 0;  ///< re-seeded simplex restarts after first convergence

    void validate() const;
};

struct LocalMinimum {
    std::vector<double> location;
    double value = kPenaltyValue;
    int start_count = 1;
    bool converged = false;
    std::size_t evaluations = 0;  ///< objective calls, summed over merged starts
};

/// Nelder-Mead from `x0` with initial simplex x0 + step[i] e_i.
LocalMinimum local_minimize(const Objective& objective, std::span<const double> x0,
                            std::span<const double> step, const OptimizerConfig& config);

/// Nelder-Mead with the initial step derived from a box.
LocalMinimum local_minimize(const Objective& objective, std::span<const double> x0,
                            const SearchBox& box, const OptimizerConfig& config);

/// Start point `index` of the seeded sequence for `box` (uniform draw).
std::vector<double> multistart_point(const SearchBox& box, std::uint64_t seed, std::size_t index);

/// n_starts local searches from seeded uniform draws in `box` (plus any
/// `extra_starts`), clustered and sorted by value ascending.
std::vector<LocalMinimum> multistart(const Objective& objective, const SearchBox& box,
                                     const OptimizerConfig& config,
                                     std::span<const std::vector<double>> extra_starts = {});

/// Greedy clustering of local-search results. Results are ordered by
/// (value, location) first so the outcome does not depend on input order.
std::vector<LocalMinimum> cluster_minima(std::vector<LocalMinimum> results,
                                         std::span<const double> tolerance);

}  // namespace lppl
