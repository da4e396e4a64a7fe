#include "lppl/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace lppl::report {

namespace {

Json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return round_sig(x);
}

Json window_json(const FitWindow& w, const PriceSeries& series) {
    Json j;
    j["start_index"] = w.start_index;
    j["end_index"] = w.end_index;
    if (w.end_index < series.size()) {
        j["start_date"] = format_iso_date(series.dates()[w.start_index]);
        j["end_date"] = format_iso_date(series.dates()[w.end_index]);
    }
    return j;
}

}  // namespace

double round_sig(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, x);
    return std::strtod(buf, nullptr);
}

std::string format_number(double x) {
    if (!std::isfinite(x)) return {};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, x);
    return buf;
}

Json to_json(const LpplParams& p) {
    Json j;
    j["t_c"] = number(p.tc);
    j["m"] = number(p.m);
    j["omega"] = number(p.omega);
    j["A"] = number(p.A);
    j["B"] = number(p.B);
    j["C1"] = number(p.C1);
    j["C2"] = number(p.C2);
    return j;
}

Json to_json(const PhaseParams& p) {
    Json j;
    j["t_c"] = number(p.tc);
    j["m"] = number(p.m);
    j["omega"] = number(p.omega);
    j["A"] = number(p.A);
    j["B"] = number(p.B);
    j["C"] = number(p.C);
    j["phi"] = number(p.phi);
    return j;
}

Json to_json(const QualificationReport& q) {
    Json j;
    j["qualified"] = q.qualified;
    Json violations = Json::array();
    for (const auto& v : q.violations) {
        Json e;
        e["parameter"] = v.parameter;
        e["value"] = number(v.value);
        e["bound"] = v.bound;
        violations.push_back(std::move(e));
    }
    j["violations"] = std::move(violations);
    return j;
}

Json to_json(const TcProfile& profile) {
    Json tc = Json::array(), f2 = Json::array(), m = Json::array(), omega = Json::array();
    Json qualified = Json::array(), minima = Json::array();
    for (std::size_t i = 0; i < profile.size(); ++i) {
        tc.push_back(number(profile.tc_grid[i]));
        f2.push_back(number(profile.f2_values[i]));
        m.push_back(number(profile.m_hat[i]));
        omega.push_back(number(profile.omega_hat[i]));
        qualified.push_back(static_cast<bool>(profile.qualified[i]));
        minima.push_back(profile.minima_count[i]);
    }
    Json j;
    j["tc_grid"] = std::move(tc);
    j["f2_values"] = std::move(f2);
    j["m_hat"] = std::move(m);
    j["omega_hat"] = std::move(omega);
    j["qualified"] = std::move(qualified);
    j["minima_count"] = std::move(minima);
    j["local_minima"] = profile.local_minima;
    if (const auto best = profile.best_index()) j["best_index"] = *best;
    else j["best_index"] = nullptr;
    Json errors = Json::object();
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (!profile.errors[i].empty()) errors[std::to_string(i)] = profile.errors[i];
    j["errors"] = std::move(errors);
    j["evaluations"] = profile.evaluations;
    return j;
}

Json to_json(const FitResult& result, const PriceSeries& series) {
    Json j;
    j["window"] = window_json(result.window, series);
    j["params"] = to_json(result.params);
    j["phase_view"] = to_json(result.phase_view);
    j["cost"] = number(result.cost);
    j["qualification"] = to_json(result.qualification);
    j["minima_count"] = result.minima_count;
    Json residuals = Json::array();
    for (double r : result.residuals) residuals.push_back(number(r));
    j["diagnostics"] = {{"residuals", std::move(residuals)}, {"evaluations", result.evaluations}};
    if (result.profile) j["profile"] = to_json(*result.profile);
    return j;
}

Json to_json(const ScanReport& report) {
    Json j;
    j["window_length"] = report.window_length;
    j["step"] = report.step;
    Json rows = Json::array();
    for (const auto& w : report.windows) {
        Json r;
        r["start_index"] = w.window.start_index;
        r["end_index"] = w.window.end_index;
        r["start_date"] = format_iso_date(w.start_date);
        r["end_date"] = format_iso_date(w.end_date);
        r["minima_count"] = w.minima_count;
        r["f2_local_minima"] = w.f2_local_minima;
        r["qualified"] = w.qualified;
        r["best"] = w.best ? to_json(*w.best) : Json(nullptr);
        r["best_cost"] = w.best ? number(w.best_cost) : Json(nullptr);
        if (!w.error.empty()) r["error"] = w.error;
        rows.push_back(std::move(r));
    }
    j["windows"] = std::move(rows);
    return j;
}

Json to_json(const CrossSection& xs) {
    Json j;
    j["cost"] = xs.spec.cost == CostKind::F1 ? "F1" : "S1";
    // only parameters that are neither swept nor irrelevant to the cost
    auto swept = [&](Axis a) {
        return xs.spec.first.axis == a || (xs.spec.second && xs.spec.second->axis == a);
    };
    Json fixed = Json::object();
    if (!swept(Axis::Tc)) fixed["t_c"] = number(xs.spec.tc);
    if (!swept(Axis::M)) fixed["m"] = number(xs.spec.m);
    if (!swept(Axis::Omega)) fixed["omega"] = number(xs.spec.omega);
    if (xs.spec.cost == CostKind::S1 && !swept(Axis::Phi)) fixed["phi"] = number(xs.spec.phi);
    j["fixed"] = std::move(fixed);
    j["first_axis"] = std::string(axis_name(xs.spec.first.axis));
    Json first = Json::array();
    for (double v : xs.first_values) first.push_back(number(v));
    j["first_values"] = std::move(first);
    if (xs.spec.second) {
        j["second_axis"] = std::string(axis_name(xs.spec.second->axis));
        Json second = Json::array();
        for (double v : xs.second_values) second.push_back(number(v));
        j["second_values"] = std::move(second);
    }
    Json grid = Json::array();
    for (std::size_t i = 0; i < xs.first_values.size(); ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < xs.second_values.size(); ++k) row.push_back(number(xs.at(i, k)));
        grid.push_back(std::move(row));
    }
    j["values"] = std::move(grid);
    Json minima = Json::array();
    for (const auto& [a, b] : xs.local_minima()) minima.push_back(xs.spec.second ? Json{a, b} : Json(a));
    j["local_minima"] = std::move(minima);
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_profile_csv(const TcProfile& profile, std::ostream& out) {
    out << "t_c,f2,m_hat,omega_hat,qualified,minima_count,local_min\n";
    std::size_t next_min = 0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        bool is_min = false;
        if (next_min < profile.local_minima.size() && profile.local_minima[next_min] == i) {
            is_min = true;
            ++next_min;
        }
        out << format_number(profile.tc_grid[i]) << ',' << format_number(profile.f2_values[i]) << ','
            << format_number(profile.m_hat[i]) << ',' << format_number(profile.omega_hat[i]) << ','
            << (profile.qualified[i] ? 1 : 0) << ',' << profile.minima_count[i] << ','
            << (is_min ? 1 : 0) << '\n';
    }
}

void write_scan_csv(const ScanReport& report, std::ostream& out) {
    out << "start_index,end_index,start_date,end_date,minima_count,f2_local_minima,qualified,"
           "t_c,m,omega,A,B,C1,C2,best_cost,error\n";
    for (const auto& w : report.windows) {
        out << w.window.start_index << ',' << w.window.end_index << ',' << format_iso_date(w.start_date)
            << ',' << format_iso_date(w.end_date) << ',' << w.minima_count << ',' << w.f2_local_minima
            << ',' << (w.qualified ? 1 : 0);
        if (w.best) {
            const auto& p = *w.best;
            for (double v : {p.tc, p.m, p.omega, p.A, p.B, p.C1, p.C2, w.best_cost})
                out << ',' << format_number(v);
        } else {
            out << ",,,,,,,,";
        }
        std::string err = w.error;
        for (char& c : err)
            if (c == ',' || c == '\n') c = ' ';
        out << ',' << err << '\n';
    }
}

void write_xsection_csv(const CrossSection& xs, std::ostream& out) {
    const bool two_d = xs.spec.second.has_value();
    out << axis_name(xs.spec.first.axis);
    if (two_d) out << ',' << axis_name(xs.spec.second->axis);
    out << ',' << (xs.spec.cost == CostKind::F1 ? "F1" : "S1") << '\n';
    for (std::size_t i = 0; i < xs.first_values.size(); ++i) {
        for (std::size_t k = 0; k < xs.second_values.size(); ++k) {
            out << format_number(xs.first_values[i]);
            if (two_d) out << ',' << format_number(xs.second_values[k]);
            out << ',' << format_number(xs.at(i, k)) << '\n';
        }
    }
}

void write_fit_csv(const FitResult& result, const PriceSeries& series, std::ostream& out) {
    const auto& p = result.params;
    const auto& q = result.phase_view;
    out << "field,value\n";
    const std::pair<const char*, double> rows[] = {
        {"t_c", p.tc}, {"m", p.m},     {"omega", p.omega}, {"A", p.A},       {"B", p.B},
        {"C1", p.C1},  {"C2", p.C2},   {"C", q.C},         {"phi", q.phi},   {"cost", result.cost},
    };
    for (const auto& [name, v] : rows) out << name << ',' << format_number(v) << '\n';
    out << "qualified," << (result.qualification.qualified ? 1 : 0) << '\n';
    out << "minima_count," << result.minima_count << '\n';
    out << "evaluations," << result.evaluations << '\n';
    out << "\ndate,time,residual\n";
    for (std::size_t i = 0; i < result.residuals.size(); ++i) {
        const std::size_t row = result.window.start_index + i;
        out << format_iso_date(series.dates()[row]) << ',' << format_number(series.times()[row]) << ','
            << format_number(result.residuals[i]) << '\n';
    }
}

}  // namespace lppl::report
