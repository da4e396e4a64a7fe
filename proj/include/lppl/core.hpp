#pragma once

// Log-periodic power law evaluation, parameter conversions, hazard-rate
// diagnostics and stylized-constraint qualification.

#include <stdexcept>
#include <string>
#include <vector>

namespace lppl {

/// Smallest admissible distance t_c - t, in trading days.
inline constexpr double kMinTimeToCritical = 1e-8;

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Cartesian form: A + B x^m + C1 x^m cos(w ln x) + C2 x^m sin(w ln x), x = t_c - t.
struct LpplParams {
    double tc = 0.0;
    double m = 0.0;
    double omega = 0.0;
    double A = 0.0;
    double B = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
};

/// Phase form: A + B x^m + C x^m cos(w ln x - phi), C >= 0, phi in [0, 2pi).
struct PhaseParams {
    double tc = 0.0;
    double m = 0.0;
    double omega = 0.0;
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double phi = 0.0;
};

struct HazardParams {
    double alpha = 1.0;
    double beta = 0.0;
    double m = 0.5;
    double omega = 8.0;
    double tc = 0.0;
    double phi_h = 0.0;
};

struct CartesianAmplitude {
    double C1 = 0.0;
    double C2 = 0.0;
};

struct PolarAmplitude {
    double C = 0.0;
    double phi = 0.0;
};

struct BoundViolation {
    std::string parameter;  ///< "m", "omega", "C", "B" or "tc"
    double value = 0.0;
    std::string bound;      ///< human readable, e.g. "m below 0.1"
};

struct QualificationReport {
    bool qualified = true;
    std::vector<BoundViolation> violations;
};

/// Stylized bounds a fit must satisfy to be considered bubble-like.
struct StylizedBounds {
    double m_min = 0.1;
    double m_max = 0.9;
    double omega_min = 6.0;
    double omega_max = 13.0;
    double amplitude_max = 1.0;  ///< strict: sqrt(C1^2 + C2^2) < amplitude_max
};

double eval_lppl(const LpplParams& p, double t);
double eval_lppl_phase(const PhaseParams& p, double t);

CartesianAmplitude phase_to_cartesian(double C, double phi);
PolarAmplitude cartesian_to_phase(double C1, double C2);

LpplParams to_cartesian(const PhaseParams& p);
PhaseParams to_phase(const LpplParams& p);

/// Wraps an angle into [0, 2pi).
double normalize_phase(double phi);

double hazard_rate(const HazardParams& p, double t);

/// beta = (C / B) sqrt(m^2 + w^2) / m; the product kappa*alpha cancels.
/// Throws std::invalid_argument when B == 0 or m == 0.
double implied_beta(double B, double C, double m, double omega);

QualificationReport qualify(const LpplParams& p, double window_end,
                            const StylizedBounds& bounds = {});

}  // namespace lppl
