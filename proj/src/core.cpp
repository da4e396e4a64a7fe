#include "lppl/core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace lppl {

namespace {

double time_to_critical(double tc, double t) {
    const double dt = tc - t;
    if (!(dt >= kMinTimeToCritical)) {
        std::ostringstream msg;
        msg << "LPPL evaluated at t=" << t << " not strictly before t_c=" << tc;
        throw DomainError(msg.str());
    }
    return dt;
}

std::string format_bound(const char* name, const char* relation, double bound) {
    std::ostringstream out;
    out << name << ' ' << relation << ' ' << bound;
    return out.str();
}

}  // namespace

double eval_lppl(const LpplParams& p, double t) {
    const double dt = time_to_critical(p.tc, t);
    const double log_dt = std::log(dt);
    const double power = std::exp(p.m * log_dt);
    const double arg = p.omega * log_dt;
    return p.A + power * (p.B + p.C1 * std::cos(arg) + p.C2 * std::sin(arg));
}

double eval_lppl_phase(const PhaseParams& p, double t) {
    const double dt = time_to_critical(p.tc, t);
    const double log_dt = std::log(dt);
    const double power = std::exp(p.m * log_dt);
    return p.A + power * (p.B + p.C * std::cos(p.omega * log_dt - p.phi));
}

double normalize_phase(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::fmod(phi, two_pi);
    if (wrapped < 0.0) wrapped += two_pi;
    // fmod of a tiny negative value can round up to exactly 2pi
    if (wrapped >= two_pi) wrapped = 0.0;
    return wrapped;
}

CartesianAmplitude phase_to_cartesian(double C, double phi) {
    return {C * std::cos(phi), C * std::sin(phi)};
}

PolarAmplitude cartesian_to_phase(double C1, double C2) {
    if (C1 == 0.0 && C2 == 0.0) return {0.0, 0.0};
    return {std::hypot(C1, C2), normalize_phase(std::atan2(C2, C1))};
}

LpplParams to_cartesian(const PhaseParams& p) {
    const auto amp = phase_to_cartesian(p.C, p.phi);
    return {p.tc, p.m, p.omega, p.A, p.B, amp.C1, amp.C2};
}

PhaseParams to_phase(const LpplParams& p) {
    const auto polar = cartesian_to_phase(p.C1, p.C2);
    return {p.tc, p.m, p.omega, p.A, p.B, polar.C, polar.phi};
}

double hazard_rate(const HazardParams& p, double t) {
    const double dt = time_to_critical(p.tc, t);
    const double log_dt = std::log(dt);
    return p.alpha * std::exp((p.m - 1.0) * log_dt) *
           (1.0 + p.beta * std::cos(p.omega * log_dt - p.phi_h));
}

double implied_beta(double B, double C, double m, double omega) {
    if (B == 0.0) throw std::invalid_argument("implied_beta: B must be non-zero");
    if (m == 0.0) throw std::invalid_argument("implied_beta: m must be non-zero");
    return (C / B) * std::sqrt(m * m + omega * omega) / m;
}

QualificationReport qualify(const LpplParams& p, double window_end,
                            const StylizedBounds& bounds) {
    QualificationReport report;
    auto add = [&](const char* name, double value, std::string bound) {
        report.violations.push_back({name, value, std::move(bound)});
    };

    if (!(p.m >= bounds.m_min)) add("m", p.m, format_bound("m", "below", bounds.m_min));
    if (!(p.m <= bounds.m_max)) add("m", p.m, format_bound("m", "above", bounds.m_max));
    if (!(p.omega >= bounds.omega_min))
        add("omega", p.omega, format_bound("omega", "below", bounds.omega_min));
    if (!(p.omega <= bounds.omega_max))
        add("omega", p.omega, format_bound("omega", "above", bounds.omega_max));
    const double amplitude = std::hypot(p.C1, p.C2);
    if (!(amplitude < bounds.amplitude_max))
        add("C", amplitude, format_bound("C", "not below", bounds.amplitude_max));
    if (!(p.B < 0.0)) add("B", p.B, "B not below 0");
    if (!(p.tc > window_end)) add("tc", p.tc, format_bound("tc", "not after", window_end));

    report.qualified = report.violations.empty();
    return report;
}

}  // namespace lppl
