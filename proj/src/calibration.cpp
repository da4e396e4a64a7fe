#include "lppl/calibration.hpp"

#include "lppl/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string_view>

namespace lppl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const simd::KernelTable& table_of(const LinearSolverConfig& linear) {
    return linear.kernels != nullptr ? *linear.kernels : simd::kernels();
}

// Window observations expressed relative to the window end, so that the
// critical time enters only as an offset s = t_c - t_end and
// t_c - tau_i = (t_end - tau_i) + s.
class WindowData {
public:
    WindowData(const PriceSeries& series, const FitWindow& window) {
        if (window.end_index >= series.size() || window.start_index > window.end_index)
            throw std::invalid_argument("fit window out of range");
        const auto& times = series.times();
        end_time_ = times[window.end_index];
        const std::size_t n = window.length();
        before_end_.resize(n);
        for (std::size_t i = 0; i < n; ++i) before_end_[i] = end_time_ - times[window.start_index + i];
        y_ = std::span<const double>(series.log_price()).subspan(window.start_index, n);
    }

    double end_time() const noexcept { return end_time_; }
    std::span<const double> y() const noexcept { return y_; }
    std::size_t size() const noexcept { return y_.size(); }

    std::vector<double> log_dt(double offset, const simd::KernelTable& k) const {
        if (!(offset >= kMinTimeToCritical))
            throw DomainError("critical time must lie beyond the window end");
        std::vector<double> dt(before_end_.size());
        for (std::size_t i = 0; i < dt.size(); ++i) dt[i] = before_end_[i] + offset;
        std::vector<double> out(dt.size());
        k.log(dt.data(), dt.size(), out.data());
        return out;
    }

private:
    double end_time_ = 0.0;
    std::vector<double> before_end_;
    std::span<const double> y_;
};

// F1 at one fixed critical time; ln(t_c - tau) computed once.
class ProfiledCost {
public:
    ProfiledCost(const WindowData& data, double offset, const LinearSolverConfig& linear)
        : data_(data), linear_(linear), kernels_(table_of(linear)),
          log_dt_(data.log_dt(offset, kernels_)) {}

    LinearSolution solve(double m, double omega) {
        ++evaluations_;
        fill_basis(log_dt_, data_.y(), m, omega, basis_, kernels_);
        return solve_linear4(basis_, linear_);
    }

    double value(double m, double omega) { return solve(m, omega).sum_squared_residuals; }

    double penalized(double m, double omega) noexcept {
        try {
            const double v = value(m, omega);
            return std::isfinite(v) ? v : kPenaltyValue;
        } catch (const std::exception&) {
            return kPenaltyValue;
        }
    }

    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    const WindowData& data_;
    const LinearSolverConfig& linear_;
    const simd::KernelTable& kernels_;
    std::vector<double> log_dt_;
    BasisColumns basis_;
    std::size_t evaluations_ = 0;
};

double legacy_cost(const WindowData& data, double offset, double m, double omega, double phi,
                   const LinearSolverConfig& linear) {
    const auto& k = table_of(linear);
    BasisColumns basis;
    basis.log_dt = data.log_dt(offset, k);
    basis.y.assign(data.y().begin(), data.y().end());
    basis.ones.assign(data.size(), 1.0);
    basis.m = m;
    basis.omega = omega;
    return solve_linear3(basis, phi, linear).sum_squared_residuals;
}

bool in_stylized_box(double m, double omega, const StylizedBounds& b) {
    return m >= b.m_min && m <= b.m_max && omega >= b.omega_min && omega <= b.omega_max;
}

LpplParams params_from(const LinearSolution& sol, double tc, double m, double omega) {
    const auto& c = sol.coefficients;
    return {tc, m, omega, c[0], c[1], c[2], c[3]};
}

std::vector<double> mw_cluster_tolerance(const CalibrationConfig& config) {
    if (config.optimizer.cluster_tolerance.size() == 2) return config.optimizer.cluster_tolerance;
    return {0.02, 0.2};
}

int count_distinct_minima(const std::vector<LocalMinimum>& clusters, const CalibrationConfig& config) {
    if (clusters.empty()) return 0;
    const double cutoff = config.cluster_cost_factor * clusters.front().value;
    int count = 0;
    for (const auto& c : clusters)
        if (in_stylized_box(c.location[0], c.location[1], config.bounds) && c.value <= cutoff) ++count;
    return count;
}

MwEstimate estimate_mw(const WindowData& data, double offset, const CalibrationConfig& config,
                       std::span<const std::vector<double>> hints, bool random_starts) {
    ProfiledCost cost(data, offset, config.linear);
    const Objective objective = [&cost](std::span<const double> x) { return cost.penalized(x[0], x[1]); };

    OptimizerConfig oc = config.optimizer;
    oc.cluster_tolerance = mw_cluster_tolerance(config);

    std::vector<LocalMinimum> clusters;
    if (random_starts) {
        clusters = multistart(objective, config.mw_box, oc, hints);
    } else {
        std::vector<LocalMinimum> runs;
        for (const auto& x0 : hints) runs.push_back(local_minimize(objective, x0, config.mw_box, oc));
        clusters = cluster_minima(std::move(runs), oc.cluster_tolerance);
    }
    if (clusters.empty())
        throw std::runtime_error("no (m, omega) start produced a finite cost");

    MwEstimate est;
    est.tc = data.end_time() + offset;
    est.m_hat = clusters.front().location[0];
    est.omega_hat = clusters.front().location[1];
    est.f2 = clusters.front().value;
    est.minima_count = count_distinct_minima(clusters, config);
    est.evaluations = cost.evaluations();
    est.clusters = std::move(clusters);
    return est;
}

struct ProfileRun {
    TcProfile profile;
    std::vector<double> offsets;
    std::vector<std::optional<MwEstimate>> estimates;
};

ProfileRun run_profile(const WindowData& data, const CalibrationConfig& config, unsigned threads) {
    ProfileRun run;
    for (std::size_t k = 0;; ++k) {
        const double off = config.tc_first + static_cast<double>(k) * config.tc_step;
        if (off > config.tc_horizon + 1e-9) break;
        run.offsets.push_back(off);
    }
    const std::size_t n = run.offsets.size();
    auto& p = run.profile;
    p.tc_grid.resize(n);
    p.f2_values.assign(n, kNaN);
    p.m_hat.assign(n, kNaN);
    p.omega_hat.assign(n, kNaN);
    p.qualified.assign(n, false);
    p.minima_count.assign(n, 0);
    p.params.assign(n, LpplParams{});
    p.errors.assign(n, std::string());
    run.estimates.resize(n);

    std::vector<LpplParams> params(n);
    std::vector<char> qualified(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
        const double off = run.offsets[i];
        try {
            MwEstimate est = estimate_mw(data, off, config, {}, true);
            ProfiledCost cost(data, off, config.linear);
            params[i] = params_from(cost.solve(est.m_hat, est.omega_hat), est.tc, est.m_hat, est.omega_hat);
            qualified[i] = qualify(params[i], data.end_time(), config.bounds).qualified ? 1 : 0;
            run.estimates[i] = std::move(est);
        } catch (const std::exception& e) {
            p.errors[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        p.tc_grid[i] = data.end_time() + run.offsets[i];
        if (!run.estimates[i]) continue;
        const auto& est = *run.estimates[i];
        p.f2_values[i] = est.f2;
        p.m_hat[i] = est.m_hat;
        p.omega_hat[i] = est.omega_hat;
        p.minima_count[i] = est.minima_count;
        p.params[i] = params[i];
        p.qualified[i] = qualified[i] != 0;
        p.evaluations += est.evaluations;
    }
    p.local_minima = grid_local_minima(p.f2_values);
    if (!p.best_index()) {
        std::string reason = n == 0 ? "empty critical-time grid" : p.errors.front();
        throw std::runtime_error("every critical-time grid point failed: " + reason);
    }
    return run;
}

FitResult assemble(const WindowData& data, const FitWindow& window, double offset, double m,
                   double omega, const CalibrationConfig& config) {
    ProfiledCost cost(data, offset, config.linear);
    FitResult out;
    out.params = params_from(cost.solve(m, omega), data.end_time() + offset, m, omega);
    out.phase_view = to_phase(out.params);
    out.qualification = qualify(out.params, data.end_time(), config.bounds);
    out.window = window;
    out.window_end_time = data.end_time();

    const auto log_dt = data.log_dt(offset, table_of(config.linear));
    const auto& k = table_of(config.linear);
    BasisColumns basis;
    fill_basis(log_dt, data.y(), m, omega, basis, k);
    out.residuals.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out.residuals[i] = basis.y[i] - out.params.A - out.params.B * basis.f[i] -
                           out.params.C1 * basis.g[i] - out.params.C2 * basis.h[i];
    out.cost = k.residual_ss(basis.y.data(), basis.f.data(), basis.g.data(), basis.h.data(),
                             basis.size(), out.params.A, out.params.B, out.params.C1, out.params.C2);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

OptimizerConfig CalibrationConfig::default_optimizer() {
    OptimizerConfig oc;
    oc.cluster_tolerance = {0.02, 0.2};
    return oc;
}

void CalibrationConfig::validate() const {
    optimizer.validate();
    mw_box.validate();
    if (mw_box.dims() != 2) throw std::invalid_argument("(m, omega) box must be two-dimensional");
    if (!(tc_first >= kMinTimeToCritical)) throw std::invalid_argument("tc_first must be positive");
    if (!(tc_step > 0.0)) throw std::invalid_argument("tc_step must be positive");
    if (!(tc_horizon >= tc_first)) throw std::invalid_argument("tc_horizon must be >= tc_first");
    if (!(tc_cluster_tolerance > 0.0)) throw std::invalid_argument("tc cluster tolerance must be positive");
    if (!(cluster_cost_factor >= 1.0)) throw std::invalid_argument("cluster cost factor must be >= 1");
    if (!(linear.max_condition > 1.0)) throw std::invalid_argument("max_condition must exceed 1");
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("LPPL_THREADS"); env != nullptr && *env != '\0') {
        unsigned v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::optional<std::size_t> TcProfile::best_index() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < f2_values.size(); ++i)
        if (std::isfinite(f2_values[i]) && (!best || f2_values[i] < f2_values[*best])) best = i;
    return best;
}

double f1(const PriceSeries& series, const FitWindow& window, double tc, double m, double omega,
          const LinearSolverConfig& linear) {
    const WindowData data(series, window);
    ProfiledCost cost(data, tc - data.end_time(), linear);
    return cost.value(m, omega);
}

double s1(const PriceSeries& series, const FitWindow& window, double tc, double m, double omega,
          double phi, const LinearSolverConfig& linear) {
    const WindowData data(series, window);
    return legacy_cost(data, tc - data.end_time(), m, omega, phi, linear);
}

LpplParams slaved_params(const PriceSeries& series, const FitWindow& window, double tc, double m,
                         double omega, const LinearSolverConfig& linear) {
    const WindowData data(series, window);
    ProfiledCost cost(data, tc - data.end_time(), linear);
    return params_from(cost.solve(m, omega), tc, m, omega);
}

MwEstimate minimize_mw(const PriceSeries& series, const FitWindow& window, double tc,
                       const CalibrationConfig& config, std::span<const std::vector<double>> hints) {
    config.validate();
    const WindowData data(series, window);
    return estimate_mw(data, tc - data.end_time(), config, hints, true);
}

std::vector<std::size_t> grid_local_minima(std::span<const double> values) {
    std::vector<std::size_t> out;
    const std::size_t n = values.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double v = values[i];
        if (!std::isfinite(v) || !std::isfinite(values[i - 1]) || !(v < values[i - 1])) continue;
        std::size_t j = i;
        while (j + 1 < n && values[j + 1] == v) ++j;
        if (j + 1 < n && std::isfinite(values[j + 1]) && values[j + 1] > v) out.push_back(i);
    }
    return out;
}

TcProfile profile_tc(const PriceSeries& series, const FitWindow& window,
                     const CalibrationConfig& config) {
    config.validate();
    window.validate(series, config.min_window_span);
    const WindowData data(series, window);
    const unsigned threads = config.threads == 0 ? default_thread_count() : config.threads;
    return run_profile(data, config, threads).profile;
}

FitResult fit(const PriceSeries& series, const FitWindow& window, const CalibrationConfig& config) {
    config.validate();
    window.validate(series, config.min_window_span);
    const WindowData data(series, window);
    const unsigned threads = config.threads == 0 ? default_thread_count() : config.threads;
    ProfileRun run = run_profile(data, config, threads);
    const std::size_t best = *run.profile.best_index();

    double offset = run.offsets[best];
    double m = run.profile.m_hat[best];
    double omega = run.profile.omega_hat[best];
    std::size_t evaluations = run.profile.evaluations;

    if (config.refine_tc && run.offsets.size() > 1) {
        const std::size_t lo_i = best == 0 ? 0 : best - 1;
        const std::size_t hi_i = std::min(best + 1, run.offsets.size() - 1);
        const double lo = run.offsets[lo_i];
        const double hi = run.offsets[hi_i];

        // Warm starts: every cluster found at the bracketing grid points.
        std::vector<std::vector<double>> hints;
        for (std::size_t i = lo_i; i <= hi_i; ++i) {
            if (!run.estimates[i]) continue;
            for (const auto& c : run.estimates[i]->clusters) hints.push_back(c.location);
        }

        std::size_t refine_evals = 0;
        const Objective f2 = [&](std::span<const double> x) {
            const double off = x[0];
            if (off < lo || off > hi) return kPenaltyValue;
            try {
                const MwEstimate est = estimate_mw(data, off, config, hints, false);
                refine_evals += est.evaluations;
                return est.f2;
            } catch (const std::exception&) {
                return kPenaltyValue;
            }
        };
        OptimizerConfig oc = config.optimizer;
        const std::vector<double> x0{offset};
        const std::vector<double> step{0.25 * (hi - lo)};
        const LocalMinimum refined = local_minimize(f2, x0, step, oc);
        evaluations += refine_evals;

        if (refined.value < run.profile.f2_values[best]) {
            const MwEstimate est = estimate_mw(data, refined.location[0], config, hints, false);
            evaluations += est.evaluations;
            if (est.f2 <= run.profile.f2_values[best]) {
                offset = refined.location[0];
                m = est.m_hat;
                omega = est.omega_hat;
            }
        }
    }

    FitResult out = assemble(data, window, offset, m, omega, config);
    out.minima_count = run.profile.minima_count[best];
    out.evaluations = evaluations;
    out.profile = std::move(run.profile);
    return out;
}

FitResult legacy_fit(const PriceSeries& series, const FitWindow& window,
                     const CalibrationConfig& config) {
    config.validate();
    window.validate(series, config.min_window_span);
    const WindowData data(series, window);

    const SearchBox box{{config.tc_first, config.mw_box.lower[0], config.mw_box.lower[1], 0.0},
                        {config.tc_horizon, config.mw_box.upper[0], config.mw_box.upper[1],
                         2.0 * std::numbers::pi}};
    const auto mw_tol = mw_cluster_tolerance(config);
    OptimizerConfig oc = config.optimizer;
    oc.cluster_tolerance = {config.tc_cluster_tolerance, mw_tol[0], mw_tol[1], 0.1};

    const Objective objective = [&](std::span<const double> x) {
        try {
            const double v = legacy_cost(data, x[0], x[1], x[2], x[3], config.linear);
            return std::isfinite(v) ? v : kPenaltyValue;
        } catch (const std::exception&) {
            return kPenaltyValue;
        }
    };
    const auto clusters = multistart(objective, box, oc);
    if (clusters.empty()) throw std::runtime_error("no legacy start produced a finite cost");

    const auto& best = clusters.front();
    const double offset = best.location[0];
    const double m = best.location[1];
    const double omega = best.location[2];
    const double phi = best.location[3];

    const auto& k = table_of(config.linear);
    BasisColumns basis;
    basis.log_dt = data.log_dt(offset, k);
    basis.y.assign(data.y().begin(), data.y().end());
    basis.ones.assign(data.size(), 1.0);
    basis.m = m;
    basis.omega = omega;
    const LinearSolution sol = solve_linear3(basis, phi, config.linear);
    const auto amp = phase_to_cartesian(sol.coefficients[2], phi);

    // Re-evaluate in the cartesian form so cost and residuals share one code path.
    const LpplParams p{data.end_time() + offset, m, omega, sol.coefficients[0], sol.coefficients[1],
                       amp.C1, amp.C2};
    FitResult out;
    out.params = p;
    out.phase_view = to_phase(p);
    out.qualification = qualify(p, data.end_time(), config.bounds);
    out.window = window;
    out.window_end_time = data.end_time();
    BasisColumns cart;
    fill_basis(basis.log_dt, data.y(), m, omega, cart, k);
    out.residuals.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out.residuals[i] = cart.y[i] - p.A - p.B * cart.f[i] - p.C1 * cart.g[i] - p.C2 * cart.h[i];
    out.cost = k.residual_ss(cart.y.data(), cart.f.data(), cart.g.data(), cart.h.data(), cart.size(),
                             p.A, p.B, p.C1, p.C2);

    const double cutoff = config.cluster_cost_factor * best.value;
    for (const auto& c : clusters) {
        out.evaluations += c.evaluations;
        if (in_stylized_box(c.location[1], c.location[2], config.bounds) && c.value <= cutoff)
            ++out.minima_count;
    }
    return out;
}

ScanReport rolling_scan(const PriceSeries& series, std::size_t window_length, std::size_t step,
                        const CalibrationConfig& config) {
    config.validate();
    if (step == 0) throw std::invalid_argument("scan step must be positive");
    if (window_length < 2 || window_length > series.size())
        throw std::invalid_argument("scan window length must not exceed the series length");

    ScanReport report;
    report.window_length = window_length;
    report.step = step;
    for (std::size_t start = 0; start + window_length <= series.size(); start += step) {
        ScanWindowRecord rec;
        rec.window = {start, start + window_length - 1};
        rec.start_date = series.dates()[rec.window.start_index];
        rec.end_date = series.dates()[rec.window.end_index];
        report.windows.push_back(rec);
    }

    CalibrationConfig inner = config;
    inner.threads = 1;
    const unsigned threads = config.threads == 0 ? default_thread_count() : config.threads;
    parallel_for(report.windows.size(), threads, [&](std::size_t w) {
        auto& rec = report.windows[w];
        try {
            rec.window.validate(series, config.min_window_span);
            const WindowData data(series, rec.window);
            const TcProfile profile = run_profile(data, inner, 1).profile;
            const std::size_t best = *profile.best_index();
            rec.minima_count = *std::max_element(profile.minima_count.begin(), profile.minima_count.end());
            rec.f2_local_minima = static_cast<int>(profile.local_minima.size());
            rec.best = profile.params[best];
            rec.best_cost = profile.f2_values[best];
            rec.qualified = profile.qualified[best];
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
    });
    return report;
}

}  // namespace lppl

namespace lppl {

std::vector<double> AxisRange::values() const {
    if (points == 0) throw std::invalid_argument("axis needs at least one point");
    if (points == 1) return {lower};
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(points - 1);
    return out;
}

std::string_view axis_name(Axis axis) {
    switch (axis) {
        case Axis::Tc: return "tc";
        case Axis::M: return "m";
        case Axis::Omega: return "omega";
        case Axis::Phi: return "phi";
    }
    return "?";
}

Axis parse_axis(std::string_view name) {
    if (name == "tc") return Axis::Tc;
    if (name == "m") return Axis::M;
    if (name == "omega") return Axis::Omega;
    if (name == "phi") return Axis::Phi;
    throw std::invalid_argument("unknown axis '" + std::string(name) + "'");
}

std::vector<std::pair<std::size_t, std::size_t>> CrossSection::local_minima() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t n1 = first_values.size();
    const std::size_t n2 = second_values.size();
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            const double v = at(i, j);
            if (!std::isfinite(v)) continue;
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const auto ii = static_cast<std::ptrdiff_t>(i) + di;
                    const auto jj = static_cast<std::ptrdiff_t>(j) + dj;
                    if (ii < 0 || jj < 0 || ii >= static_cast<std::ptrdiff_t>(n1) ||
                        jj >= static_cast<std::ptrdiff_t>(n2))
                        continue;
                    const double w = at(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj));
                    if (std::isfinite(w) && !(v < w)) {
                        is_min = false;
                        break;
                    }
                }
            }
            if (is_min) out.emplace_back(i, j);
        }
    }
    return out;
}

CrossSection cross_section(const PriceSeries& series, const FitWindow& window,
                           const CrossSectionSpec& spec, const LinearSolverConfig& linear) {
    if (spec.cost == CostKind::F1 &&
        (spec.first.axis == Axis::Phi || (spec.second && spec.second->axis == Axis::Phi)))
        throw std::invalid_argument("phi is not a parameter of F1");
    if (spec.second && spec.second->axis == spec.first.axis)
        throw std::invalid_argument("cross-section axes must differ");

    CrossSection out;
    out.spec = spec;
    out.first_values = spec.first.values();
    out.second_values = spec.second ? spec.second->values() : std::vector<double>{kNaN};
    out.values.assign(out.first_values.size() * out.second_values.size(), kNaN);

    const WindowData data(series, window);
    auto assign = [](Axis axis, double v, double& tc, double& m, double& omega, double& phi) {
        switch (axis) {
            case Axis::Tc: tc = v; break;
            case Axis::M: m = v; break;
            case Axis::Omega: omega = v; break;
            case Axis::Phi: phi = v; break;
        }
    };
    for (std::size_t i = 0; i < out.first_values.size(); ++i) {
        for (std::size_t j = 0; j < out.second_values.size(); ++j) {
            double tc = spec.tc, m = spec.m, omega = spec.omega, phi = spec.phi;
            assign(spec.first.axis, out.first_values[i], tc, m, omega, phi);
            if (spec.second) assign(spec.second->axis, out.second_values[j], tc, m, omega, phi);
            try {
                const double off = tc - data.end_time();
                out.values[i * out.second_values.size() + j] =
                    spec.cost == CostKind::F1 ? ProfiledCost(data, off, linear).value(m, omega)
                                              : legacy_cost(data, off, m, omega, phi, linear);
            } catch (const std::exception&) {
                // undefined point stays NaN
            }
        }
    }
    return out;
}

}  // namespace lppl
