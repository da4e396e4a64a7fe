#include "cli.hpp"

#include "lppl/calibration.hpp"
#include "lppl/report.hpp"
#include "lppl/simd.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lppl::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr const char* kFooter =
    "Exit codes:\n"
    "  0  success (including fits that fail the stylized-fact qualification)\n"
    "  2  usage error: unknown flag, missing or out-of-range value\n"
    "  3  I/O error: unreadable input, malformed CSV, unwritable output\n"
    "  4  calibration error: window outside the series or too short, no valid critical time,\n"
    "     rank-deficient design\n"
    "\n"
    "Environment:\n"
    "  LPPL_THREADS  default for --threads (otherwise the hardware thread count)\n";

struct DataOptions {
    std::string input;
    std::string t1;
    std::string t2;
    std::string output;
    std::string format = "json";
    std::string solver = "qr";
    std::string kernels = "auto";
};

struct SearchOptions {
    double tc_first = 1.0;
    double horizon = 90.0;
    double tc_step = 1.0;
    int n_starts = 20;
    std::uint64_t seed = 0;
    double x_tol = 1e-8;
    double f_tol = 1e-10;
    int max_iter = 2000;
    bool no_refine = false;
    unsigned threads = 1;
};

void add_data_options(CLI::App* cmd, DataOptions& o, bool with_format) {
    cmd->add_option("-i,--input", o.input, "Price CSV (date,price rows, ISO dates)")->required();
    cmd->add_option("--t1", o.t1, "Window start date YYYY-MM-DD (default: first row)");
    cmd->add_option("--t2", o.t2, "Window end date YYYY-MM-DD (default: last row)");
    cmd->add_option("-o,--output", o.output, "Output file (default: standard output)");
    if (with_format)
        cmd->add_option("--format", o.format, "Output format")
            ->check(CLI::IsMember({"json", "csv"}))
            ->capture_default_str();
    cmd->add_option("--solver", o.solver, "Linear solver: qr (orthogonalization) or lu (normal equations)")
        ->check(CLI::IsMember({"qr", "lu"}))
        ->capture_default_str();
    cmd->add_option("--kernels", o.kernels, "Numeric kernels: auto, scalar or avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
        ->capture_default_str();
}

void add_search_options(CLI::App* cmd, SearchOptions& o) {
    cmd->add_option("--tc-first", o.tc_first, "First critical time, trading days after t2")
        ->check(CLI::Range(1e-6, 1e6))
        ->capture_default_str();
    cmd->add_option("--horizon", o.horizon, "Last critical time, trading days after t2")
        ->check(CLI::Range(1e-6, 1e6))
        ->capture_default_str();
    cmd->add_option("--tc-step", o.tc_step, "Critical-time grid step, trading days")
        ->check(CLI::Range(1e-3, 1e6))
        ->capture_default_str();
    cmd->add_option("--n-starts", o.n_starts, "Random starts per local search")
        ->check(CLI::Range(1, 100000))
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--x-tol", o.x_tol, "Simplex size tolerance")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--f-tol", o.f_tol, "Relative simplex value tolerance")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--max-iter", o.max_iter, "Simplex iterations per local search")
        ->check(CLI::Range(1, 10000000))
        ->capture_default_str();
    cmd->add_flag("--no-refine", o.no_refine, "Skip the sub-grid critical-time refinement");
    o.threads = default_thread_count();
    cmd->add_option("--threads", o.threads, "Worker threads (default: LPPL_THREADS or hardware count)")
        ->check(CLI::Range(1u, 1024u));
}

Date parse_date_flag(const std::string& text, const char* flag) {
    Date d;
    if (!parse_iso_date(text, d))
        throw UsageError(std::string(flag) + ": not an ISO date (YYYY-MM-DD): '" + text + "'");
    return d;
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

PriceSeries load_input(const DataOptions& o) { return load_csv_file(o.input); }

FitWindow select_window(const PriceSeries& series, const DataOptions& o) {
    if (o.t1.empty() && o.t2.empty()) return full_window(series);
    const Date t1 = o.t1.empty() ? series.dates().front() : parse_date_flag(o.t1, "--t1");
    const Date t2 = o.t2.empty() ? series.dates().back() : parse_date_flag(o.t2, "--t2");
    if (t2 < t1) throw UsageError("--t2 must not precede --t1");
    return slice_window(series, t1, t2);
}

LinearSolverConfig linear_config(const DataOptions& o) {
    LinearSolverConfig lc;
    lc.method = o.solver == "lu" ? LinearMethod::NormalEquationsLu : LinearMethod::Orthogonal;
    if (o.kernels == "scalar") {
        lc.kernels = &simd::kernels_for(simd::Isa::Scalar);
    } else if (o.kernels == "avx2") {
        if (!simd::isa_available(simd::Isa::Avx2))
            throw UsageError("--kernels avx2: not supported on this CPU or build");
        lc.kernels = &simd::kernels_for(simd::Isa::Avx2);
    }
    return lc;
}

CalibrationConfig calibration_config(const DataOptions& d, const SearchOptions& s) {
    CalibrationConfig cfg;
    cfg.linear = linear_config(d);
    cfg.tc_first = s.tc_first;
    cfg.tc_horizon = s.horizon;
    cfg.tc_step = s.tc_step;
    cfg.refine_tc = !s.no_refine;
    cfg.optimizer.n_starts = s.n_starts;
    cfg.optimizer.rng_seed = s.seed;
    cfg.optimizer.x_tolerance = s.x_tol;
    cfg.optimizer.f_tolerance = s.f_tol;
    cfg.optimizer.max_iterations = s.max_iter;
    cfg.threads = s.threads;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        out.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::ios_base::failure("cannot open output file " + path);
    file << text;
    file.flush();
    if (!file) throw std::ios_base::failure("write failed: " + path);
}

// Time coordinate of a critical-time value given as a row index / time or a
// date. Dates after the last row are extended over weekdays.
double resolve_time(const std::string& text, const PriceSeries& series) {
    if (const auto v = parse_double(text)) return *v;
    Date d;
    if (!parse_iso_date(text, d)) throw UsageError("tc: expected a number or an ISO date, got '" + text + "'");
    if (const auto idx = series.index_of(d); idx >= 0) return series.times()[static_cast<std::size_t>(idx)];
    const Date last = series.dates().back();
    if (d < series.dates().front()) throw UsageError("tc: date precedes the series");
    if (d < last) throw UsageError("tc: " + text + " is not a trading day of the series");
    std::chrono::sys_days day{last};
    const std::chrono::sys_days target{d};
    double t = series.times().back();
    while (day < target) {
        day += std::chrono::days{1};
        const std::chrono::weekday wd{day};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) t += 1.0;
    }
    return t;
}

// ---------------------------------------------------------------------------

struct XsectionOptions {
    std::vector<std::string> fix;
    std::string axes = "m,omega";
    std::string cost = "f1";
    std::size_t points = 61;
    std::vector<std::string> ranges;
};

CrossSectionSpec xsection_spec(const XsectionOptions& xo, const PriceSeries& series, const FitWindow& window) {
    CrossSectionSpec spec;
    spec.cost = xo.cost == "s1" ? CostKind::S1 : CostKind::F1;

    const auto axis_names = split(xo.axes, ',');
    if (axis_names.empty() || axis_names.size() > 2) throw UsageError("--axes: give one or two axes");
    std::vector<Axis> axes;
    for (const auto& name : axis_names) {
        try {
            axes.push_back(parse_axis(name));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--axes: ") + e.what());
        }
    }
    if (axes.size() == 2 && axes[0] == axes[1]) throw UsageError("--axes: axes must differ");
    if (spec.cost == CostKind::F1)
        for (Axis a : axes)
            if (a == Axis::Phi) throw UsageError("--axes: phi is only an axis of the s1 cost");

    const double t_end = series.times()[window.end_index];
    std::map<Axis, std::pair<double, double>> bounds{
        {Axis::Tc, {t_end + 1.0, t_end + 90.0}},
        {Axis::M, {0.1, 0.9}},
        {Axis::Omega, {6.0, 13.0}},
        {Axis::Phi, {0.0, 2.0 * std::numbers::pi}},
    };
    for (const auto& item : xo.ranges) {
        const auto eq = item.find('=');
        const auto colon = item.find(':', eq == std::string::npos ? 0 : eq);
        if (eq == std::string::npos || colon == std::string::npos)
            throw UsageError("--range: expected axis=lo:hi, got '" + item + "'");
        Axis a;
        try {
            a = parse_axis(item.substr(0, eq));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--range: ") + e.what());
        }
        const auto lo = parse_double(item.substr(eq + 1, colon - eq - 1));
        const auto hi = parse_double(item.substr(colon + 1));
        if (!lo || !hi || !(*lo < *hi)) throw UsageError("--range: need numeric lo < hi in '" + item + "'");
        bounds[a] = {*lo, *hi};
    }

    std::map<Axis, double> fixed;
    for (const auto& group : xo.fix) {
        for (const auto& item : split(group, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw UsageError("--fix: expected name=value, got '" + item + "'");
            Axis a;
            try {
                a = parse_axis(item.substr(0, eq));
            } catch (const std::invalid_argument& e) {
                throw UsageError(std::string("--fix: ") + e.what());
            }
            const std::string value = item.substr(eq + 1);
            if (a == Axis::Tc) {
                fixed[a] = resolve_time(value, series);
            } else {
                const auto v = parse_double(value);
                if (!v) throw UsageError("--fix: not a number: '" + value + "'");
                fixed[a] = *v;
            }
        }
    }

    std::vector<Axis> needed{Axis::Tc, Axis::M, Axis::Omega};
    if (spec.cost == CostKind::S1) needed.push_back(Axis::Phi);
    for (Axis a : needed) {
        const bool on_axis = std::find(axes.begin(), axes.end(), a) != axes.end();
        if (!on_axis && !fixed.count(a))
            throw UsageError("--fix: missing value for " + std::string(axis_name(a)));
    }
    spec.tc = fixed.count(Axis::Tc) ? fixed[Axis::Tc] : bounds[Axis::Tc].first;
    spec.m = fixed.count(Axis::M) ? fixed[Axis::M] : 0.5;
    spec.omega = fixed.count(Axis::Omega) ? fixed[Axis::Omega] : 8.0;
    spec.phi = fixed.count(Axis::Phi) ? fixed[Axis::Phi] : 0.0;

    auto make_range = [&](Axis a) {
        return AxisRange{a, bounds[a].first, bounds[a].second, xo.points};
    };
    spec.first = make_range(axes[0]);
    if (axes.size() == 2) spec.second = make_range(axes[1]);
    return spec;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
    double m = 0.6;
    double omega = 9.0;
    double tc_offset = 30.0;
    std::size_t n = 150;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    double A = 8.0;
    double B = -1.0;
    double C = 0.2;
    double phi = 1.0;
    std::string start_date = "2000-01-03";
    std::string output;
};

std::string run_synth(const SynthOptions& so) {
    SynthSpec spec;
    spec.n_points = so.n;
    spec.noise_sigma = so.sigma;
    spec.rng_seed = so.seed;
    spec.start_date = parse_date_flag(so.start_date, "--start-date");
    spec.params = PhaseParams{static_cast<double>(so.n - 1) + so.tc_offset, so.m, so.omega, so.A, so.B, so.C,
                              so.phi};
    std::ostringstream text;
    write_csv(synth_generate(spec), text);
    return text.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Log-periodic power law (LPPL) bubble calibration", "lppl"};
    app.footer(kFooter);
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every command");

    DataOptions fit_d, legacy_d, prof_d, scan_d, xs_d;
    SearchOptions fit_s, legacy_s, prof_s, scan_s;

    auto* fit_cmd = app.add_subcommand("fit", "Calibrate with the profiled (t_c, m, omega) scheme");
    add_data_options(fit_cmd, fit_d, true);
    add_search_options(fit_cmd, fit_s);

    auto* legacy_cmd =
        app.add_subcommand("legacy-fit", "Calibrate with the four-parameter (t_c, m, omega, phi) scheme");
    add_data_options(legacy_cmd, legacy_d, true);
    add_search_options(legacy_cmd, legacy_s);

    auto* prof_cmd = app.add_subcommand("profile", "Profile cost F2 over the critical-time grid");
    add_data_options(prof_cmd, prof_d, true);
    add_search_options(prof_cmd, prof_s);

    std::size_t window_length = 126, step = 5;
    auto* scan_cmd = app.add_subcommand("scan", "Rolling-window minima study");
    add_data_options(scan_cmd, scan_d, true);
    add_search_options(scan_cmd, scan_s);
    scan_cmd->add_option("--window-length", window_length, "Window length in trading days")
        ->check(CLI::Range(static_cast<std::size_t>(5), static_cast<std::size_t>(1000000)))
        ->capture_default_str();
    scan_cmd->add_option("--step", step, "Window step in trading days")
        ->check(CLI::Range(static_cast<std::size_t>(1), static_cast<std::size_t>(1000000)))
        ->capture_default_str();

    XsectionOptions xo;
    auto* xs_cmd = app.add_subcommand("xsection", "Grid of the F1 (or legacy S1) cost over one or two axes");
    add_data_options(xs_cmd, xs_d, true);
    xs_cmd->add_option("--axes", xo.axes, "Axis or comma-separated axis pair from tc, m, omega, phi")
        ->capture_default_str();
    xs_cmd->add_option("--cost", xo.cost, "Cost: f1 (profiled) or s1 (legacy, fixed phi)")
        ->check(CLI::IsMember({"f1", "s1"}))
        ->capture_default_str();
    xs_cmd->add_option("--fix", xo.fix,
                       "Fixed values name=value[,name=value]; tc takes a row time or an ISO date");
    xs_cmd->add_option("--points", xo.points, "Grid points per axis")
        ->check(CLI::Range(static_cast<std::size_t>(2), static_cast<std::size_t>(100000)))
        ->capture_default_str();
    xs_cmd->add_option("--range", xo.ranges,
                       "Axis range axis=lo:hi (defaults m 0.1:0.9, omega 6:13, phi 0:2pi, tc t2+1:t2+90)");

    SynthOptions so;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic LPPL price series as CSV");
    synth_cmd->add_option("--m", so.m, "Exponent m")->capture_default_str();
    synth_cmd->add_option("--omega", so.omega, "Angular log-frequency")->capture_default_str();
    synth_cmd->add_option("--tc-offset", so.tc_offset, "Critical time, trading days after the last row")
        ->check(CLI::Range(1e-6, 1e9))
        ->capture_default_str();
    synth_cmd->add_option("--n", so.n, "Number of rows")
        ->check(CLI::Range(static_cast<std::size_t>(2), static_cast<std::size_t>(10000000)))
        ->capture_default_str();
    synth_cmd->add_option("--sigma", so.sigma, "Gaussian log-price noise level")
        ->check(CLI::Range(0.0, 1e3))
        ->capture_default_str();
    synth_cmd->add_option("--seed", so.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--A", so.A, "Log-price level at t_c")->capture_default_str();
    synth_cmd->add_option("--B", so.B, "Power-law amplitude")->capture_default_str();
    synth_cmd->add_option("--C", so.C, "Oscillation amplitude")->capture_default_str();
    synth_cmd->add_option("--phi", so.phi, "Oscillation phase")->capture_default_str();
    synth_cmd->add_option("--start-date", so.start_date, "Date of the first row")->capture_default_str();
    synth_cmd->add_option("-o,--output", so.output, "Output file (default: standard output)");

    std::vector<const char*> argv{"lppl"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*synth_cmd) {
            emit(run_synth(so), so.output, out);
            return kExitOk;
        }

        auto data_run = [&](const DataOptions& d, auto&& body) {
            const PriceSeries series = load_input(d);
            const FitWindow window = select_window(series, d);
            std::ostringstream text;
            body(series, window, text);
            emit(text.str(), d.output, out);
        };

        if (*fit_cmd || *legacy_cmd) {
            const bool legacy = static_cast<bool>(*legacy_cmd);
            const DataOptions& d = legacy ? legacy_d : fit_d;
            const CalibrationConfig cfg = calibration_config(d, legacy ? legacy_s : fit_s);
            data_run(d, [&](const PriceSeries& series, const FitWindow& window, std::ostream& text) {
                const FitResult result = legacy ? legacy_fit(series, window, cfg) : fit(series, window, cfg);
                if (d.format == "csv") report::write_fit_csv(result, series, text);
                else text << report::dump(report::to_json(result, series));
            });
        } else if (*prof_cmd) {
            const CalibrationConfig cfg = calibration_config(prof_d, prof_s);
            data_run(prof_d, [&](const PriceSeries& series, const FitWindow& window, std::ostream& text) {
                const TcProfile profile = profile_tc(series, window, cfg);
                if (prof_d.format == "csv") report::write_profile_csv(profile, text);
                else text << report::dump(report::to_json(profile));
            });
        } else if (*scan_cmd) {
            const CalibrationConfig cfg = calibration_config(scan_d, scan_s);
            data_run(scan_d, [&](const PriceSeries& series, const FitWindow& window, std::ostream& text) {
                const std::size_t first = window.start_index;
                std::vector<Date> dates(series.dates().begin() + static_cast<std::ptrdiff_t>(first),
                                        series.dates().begin() + static_cast<std::ptrdiff_t>(window.end_index) + 1);
                std::vector<double> prices(series.prices().begin() + static_cast<std::ptrdiff_t>(first),
                                           series.prices().begin() + static_cast<std::ptrdiff_t>(window.end_index) + 1);
                const PriceSeries sub(std::move(dates), std::move(prices), series.times()[first]);
                ScanReport rep = rolling_scan(sub, window_length, step, cfg);
                for (auto& w : rep.windows) {
                    w.window.start_index += first;
                    w.window.end_index += first;
                }
                if (scan_d.format == "csv") report::write_scan_csv(rep, text);
                else text << report::dump(report::to_json(rep));
            });
        } else if (*xs_cmd) {
            const LinearSolverConfig lc = linear_config(xs_d);
            data_run(xs_d, [&](const PriceSeries& series, const FitWindow& window, std::ostream& text) {
                window.validate(series, kMinObservations);
                const CrossSection xs = cross_section(series, window, xsection_spec(xo, series, window), lc);
                if (xs_d.format == "csv") report::write_xsection_csv(xs, text);
                else text << report::dump(report::to_json(xs));
            });
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "lppl: " << e.what() << "\nRun with --help for more information.\n";
        return kExitUsage;
    } catch (const std::ios_base::failure& e) {
        err << "lppl: I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const CsvError& e) {
        err << "lppl: input error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "lppl: calibration error: " << e.what() << '\n';
        return kExitCalibration;
    }
}

}  // namespace lppl::cli
