#pragma once

// Price-series ingestion, trading-day indexing, window slicing and seeded
// synthetic LPPL series.

#include "lppl/core.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lppl {

using Date = std::chrono::year_month_day;

/// Malformed CSV input. line() is 1-based; 0 when not tied to a line.
class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ParseError : public CsvError {
public:
    using CsvError::CsvError;
};

class DuplicateDateError : public CsvError {
public:
    using CsvError::CsvError;
};

class NonPositivePriceError : public CsvError {
public:
    using CsvError::CsvError;
};

class EmptyWindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses YYYY-MM-DD; returns false on anything else.
bool parse_iso_date(std::string_view text, Date& out);
std::string format_iso_date(const Date& d);

/// Observations indexed by trading day. time(i) = time_origin + i; calendar
/// dates are metadata only.
class PriceSeries {
public:
    PriceSeries() = default;

    /// Validates: N >= 2, dates strictly increasing, prices finite and > 0.
    PriceSeries(std::vector<Date> dates, std::vector<double> prices, double time_origin = 0.0);

    /// Builds a series directly from log-prices with consecutive weekday dates.
    static PriceSeries from_log_prices(std::vector<double> log_prices,
                                       Date first_date = default_start_date(),
                                       double time_origin = 0.0);

    static Date default_start_date();

    std::size_t size() const noexcept { return log_price_.size(); }
    const std::vector<Date>& dates() const noexcept { return dates_; }
    const std::vector<double>& prices() const noexcept { return prices_; }
    const std::vector<double>& log_price() const noexcept { return log_price_; }
    const std::vector<double>& times() const noexcept { return times_; }
    double time_origin() const noexcept { return time_origin_; }

    /// Same observations with every time shifted by `delta`.
    PriceSeries shifted(double delta) const;

    /// Prices multiplied by `factor` (> 0).
    PriceSeries scaled(double factor) const;

    /// Row index of an exact date, or -1.
    std::ptrdiff_t index_of(const Date& d) const;

private:
    std::vector<Date> dates_;
    std::vector<double> prices_;
    std::vector<double> log_price_;
    std::vector<double> times_;
    double time_origin_ = 0.0;

    void rebuild_times();
};

/// Inclusive index range [start_index, end_index] into a PriceSeries.
struct FitWindow {
    std::size_t start_index = 0;
    std::size_t end_index = 0;

    std::size_t length() const noexcept { return end_index - start_index + 1; }
    /// Throws std::invalid_argument if out of range or shorter than allowed.
    void validate(const PriceSeries& series, std::size_t min_span = 30) const;
};

/// Whole-series window.
FitWindow full_window(const PriceSeries& series);

/// Rows with t1 <= date <= t2. Dates absent from the series snap inward.
FitWindow slice_window(const PriceSeries& series, const Date& t1, const Date& t2);

PriceSeries load_csv(std::istream& in);
PriceSeries load_csv_file(const std::filesystem::path& path);

/// Writes "date,price" rows; prices with 17 significant digits.
void write_csv(const PriceSeries& series, std::ostream& out);
void write_csv_file(const PriceSeries& series, const std::filesystem::path& path);

struct SynthSpec {
    PhaseParams params;
    std::size_t n_points = 150;
    double noise_sigma = 0.0;
    std::uint64_t rng_seed = 0;
    Date start_date = PriceSeries::default_start_date();
};

/// log_price[i] = LPPL(i) + sigma z_i, z_i iid standard normal.
PriceSeries synth_generate(const SynthSpec& spec);

}  // namespace lppl
