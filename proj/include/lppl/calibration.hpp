#pragma once

// LPPL calibration by variable projection.
//
// The four linear parameters (A, B, C1, C2) are slaved to (t_c, m, omega),
// giving the profiled cost F1(t_c, m, omega). The shape parameters (m, omega)
// are in turn slaved to t_c, giving F2(t_c) = min_{m,omega} F1, which is
// scanned over a grid of critical times beyond the window end and refined
// between grid neighbours. The legacy route (phase phi as a fourth nonlinear
// parameter, three linear parameters) is kept as an independent oracle.

#include "lppl/core.hpp"
#include "lppl/data_io.hpp"
#include "lppl/linear_solver.hpp"
#include "lppl/optimizer.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lppl {

struct CalibrationConfig {
    OptimizerConfig optimizer = default_optimizer();
    LinearSolverConfig linear;
    StylizedBounds bounds;

    /// Start box for (m, omega) searches.
    SearchBox mw_box{{0.1, 6.0}, {0.9, 13.0}};

    /// Critical-time grid, in trading days after the window end.
    double tc_first = 1.0;
    double tc_horizon = 90.0;
    double tc_step = 1.0;
    bool refine_tc = true;
    double tc_cluster_tolerance = 0.5;

    /// Clusters costlier than factor * best are not counted as distinct minima.
    double cluster_cost_factor = 10.0;

    std::size_t min_window_span = 30;

    /// Worker threads for grid points / windows; 0 = default_thread_count().
    unsigned threads = 1;

    static OptimizerConfig default_optimizer();
    void validate() const;
};

/// Result of slaving (m, omega) to one critical time.
struct MwEstimate {
    double tc = 0.0;
    double m_hat = 0.0;
    double omega_hat = 0.0;
    double f2 = 0.0;
    int minima_count = 0;               ///< distinct clusters inside the stylized (m, omega) box
    std::vector<LocalMinimum> clusters;  ///< all clusters, best first (location = {m, omega})
    std::size_t evaluations = 0;
};

struct TcProfile {
    std::vector<double> tc_grid;
    std::vector<double> f2_values;  ///< NaN where the point failed
    std::vector<double> m_hat;
    std::vector<double> omega_hat;
    std::vector<bool> qualified;
    std::vector<int> minima_count;
    std::vector<LpplParams> params;        ///< full parameter set per grid point
    std::vector<std::size_t> local_minima;  ///< grid indices of F2 local minima
    std::vector<std::string> errors;        ///< non-empty where the point failed
    std::size_t evaluations = 0;

    std::size_t size() const noexcept { return tc_grid.size(); }
    /// Index of the smallest finite F2 (earliest on ties); nullopt if none.
    std::optional<std::size_t> best_index() const;
};

struct FitResult {
    LpplParams params;
    PhaseParams phase_view;
    double cost = 0.0;
    QualificationReport qualification;
    int minima_count = 0;
    std::optional<TcProfile> profile;
    std::vector<double> residuals;  ///< observed minus fitted log-price
    std::size_t evaluations = 0;    ///< cost-function evaluations (F1 or S1)
    double window_end_time = 0.0;
    FitWindow window;
};

struct ScanWindowRecord {
    FitWindow window;
    Date start_date;
    Date end_date;
    int minima_count = 0;  ///< max over the t_c grid of distinct in-box (m, omega) minima
    int f2_local_minima = 0;
    bool qualified = false;
    std::optional<LpplParams> best;  ///< best grid point of the window
    double best_cost = 0.0;
    std::string error;
};

struct ScanReport {
    std::size_t window_length = 0;
    std::size_t step = 0;
    std::vector<ScanWindowRecord> windows;
};

/// Worker count from LPPL_THREADS, else hardware concurrency.
unsigned default_thread_count();

/// Profiled cost: residual sum of squares after solving for (A, B, C1, C2).
/// Throws DomainError / RankDeficientError.
double f1(const PriceSeries& series, const FitWindow& window, double tc, double m, double omega,
          const LinearSolverConfig& linear = {});

/// Legacy profiled cost with fixed phase: min over (A, B, C).
double s1(const PriceSeries& series, const FitWindow& window, double tc, double m, double omega,
          double phi, const LinearSolverConfig& linear = {});

/// Linear parameters at (tc, m, omega).
LpplParams slaved_params(const PriceSeries& series, const FitWindow& window, double tc, double m,
                         double omega, const LinearSolverConfig& linear = {});

/// Multistart over (m, omega) at fixed t_c. `hints` are extra start points.
MwEstimate minimize_mw(const PriceSeries& series, const FitWindow& window, double tc,
                       const CalibrationConfig& config,
                       std::span<const std::vector<double>> hints = {});

/// F2 over the critical-time grid.
TcProfile profile_tc(const PriceSeries& series, const FitWindow& window,
                     const CalibrationConfig& config);

/// Grid indices that are strict three-point minima (plateaus resolved to
/// their earliest index, endpoints and missing values excluded).
std::vector<std::size_t> grid_local_minima(std::span<const double> values);

FitResult fit(const PriceSeries& series, const FitWindow& window, const CalibrationConfig& config);

/// Four-dimensional multistart over (t_c, m, omega, phi) on the legacy cost.
FitResult legacy_fit(const PriceSeries& series, const FitWindow& window,
                     const CalibrationConfig& config);

ScanReport rolling_scan(const PriceSeries& series, std::size_t window_length, std::size_t step,
                        const CalibrationConfig& config);

enum class CostKind { F1, S1 };

enum class Axis { Tc, M, Omega, Phi };

struct AxisRange {
    Axis axis = Axis::M;
    double lower = 0.0;
    double upper = 1.0;
    std::size_t points = 50;

    std::vector<double> values() const;
};

/// Grid of F1 (or legacy S1) over one or two axes, other parameters fixed.
struct CrossSectionSpec {
    CostKind cost = CostKind::F1;
    AxisRange first;
    std::optional<AxisRange> second;
    double tc = 0.0;  ///< absolute critical time
    double m = 0.5;
    double omega = 8.0;
    double phi = 0.0;  ///< S1 only
};

struct CrossSection {
    CrossSectionSpec spec;
    std::vector<double> first_values;
    std::vector<double> second_values;  ///< a single NaN when one-dimensional
    std::vector<double> values;         ///< row-major [first][second]; NaN where undefined

    double at(std::size_t i, std::size_t j) const { return values[i * second_values.size() + j]; }
    /// (i, j) cells strictly below every existing 8-neighbour.
    std::vector<std::pair<std::size_t, std::size_t>> local_minima() const;
};

CrossSection cross_section(const PriceSeries& series, const FitWindow& window,
                           const CrossSectionSpec& spec, const LinearSolverConfig& linear = {});

std::string_view axis_name(Axis axis);
/// Accepts "tc", "m", "omega", "phi"; throws std::invalid_argument otherwise.
Axis parse_axis(std::string_view name);

}  // namespace lppl
