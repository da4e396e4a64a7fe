#pragma once

// Plot-ready serialization of calibration results. Field order is fixed and
// every real is rounded to 12 significant digits, so identical runs produce
// byte-identical output. Non-finite values become JSON null / empty CSV cells.

#include "lppl/calibration.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>

namespace lppl::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSignificantDigits = 12;

/// x rounded to 12 significant digits (exactly representable text round trip).
double round_sig(double x);

/// "%.12g" text, or an empty string for non-finite values.
std::string format_number(double x);

Json to_json(const LpplParams& p);
Json to_json(const PhaseParams& p);
Json to_json(const QualificationReport& q);
Json to_json(const TcProfile& profile);
Json to_json(const FitResult& result, const PriceSeries& series);
Json to_json(const ScanReport& report);
Json to_json(const CrossSection& xs);

/// JSON text with two-space indentation and a trailing newline.
std::string dump(const Json& j);

void write_profile_csv(const TcProfile& profile, std::ostream& out);
void write_scan_csv(const ScanReport& report, std::ostream& out);
void write_xsection_csv(const CrossSection& xs, std::ostream& out);
/// One "field,value" row per scalar, followed by the residual table.
void write_fit_csv(const FitResult& result, const PriceSeries& series, std::ostream& out);

}  // namespace lppl::report
