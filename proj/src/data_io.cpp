#include "lppl/data_io.hpp"

#include "lppl/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lppl {

namespace {

using std::chrono::sys_days;

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
    int v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

bool parse_number(std::string_view text, double& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = first + text.size();
    if (*first == '+') ++first;  // from_chars rejects a leading '+'
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string at_line(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

bool is_weekend(const Date& d) {
    const std::chrono::weekday wd{sys_days{d}};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Date next_weekday(const Date& d) {
    Date next{sys_days{d} + std::chrono::days{1}};
    while (is_weekend(next)) next = Date{sys_days{next} + std::chrono::days{1}};
    return next;
}

}  // namespace

bool parse_iso_date(std::string_view text, Date& out) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    const auto y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return false;
    const Date date{std::chrono::year{to_int(y)}, std::chrono::month{static_cast<unsigned>(to_int(m))},
                    std::chrono::day{static_cast<unsigned>(to_int(d))}};
    if (!date.ok()) return false;
    out = date;
    return true;
}

std::string format_iso_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

// ---------------------------------------------------------------------------

PriceSeries::PriceSeries(std::vector<Date> dates, std::vector<double> prices, double time_origin)
    : dates_(std::move(dates)), prices_(std::move(prices)), time_origin_(time_origin) {
    if (dates_.size() != prices_.size())
        throw std::invalid_argument("price series: dates and prices differ in length");
    if (dates_.size() < 2) throw std::invalid_argument("price series: at least 2 observations required");
    for (std::size_t i = 1; i < dates_.size(); ++i)
        if (!(sys_days{dates_[i - 1]} < sys_days{dates_[i]}))
            throw std::invalid_argument("price series: dates must be strictly increasing");
    log_price_.resize(prices_.size());
    for (std::size_t i = 0; i < prices_.size(); ++i) {
        if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i]))
            throw std::invalid_argument("price series: prices must be finite and positive");
        log_price_[i] = std::log(prices_[i]);
    }
    rebuild_times();
}

PriceSeries PriceSeries::from_log_prices(std::vector<double> log_prices, Date first_date,
                                         double time_origin) {
    if (log_prices.size() < 2) throw std::invalid_argument("price series: at least 2 observations required");
    PriceSeries s;
    s.time_origin_ = time_origin;
    s.dates_.reserve(log_prices.size());
    Date d = is_weekend(first_date) ? next_weekday(first_date) : first_date;
    for (std::size_t i = 0; i < log_prices.size(); ++i) {
        if (!std::isfinite(log_prices[i]))
            throw std::invalid_argument("price series: log-prices must be finite");
        s.dates_.push_back(d);
        d = next_weekday(d);
    }
    s.prices_.resize(log_prices.size());
    std::transform(log_prices.begin(), log_prices.end(), s.prices_.begin(),
                   [](double lp) { return std::exp(lp); });
    s.log_price_ = std::move(log_prices);
    s.rebuild_times();
    return s;
}

Date PriceSeries::default_start_date() {
    return Date{std::chrono::year{2000}, std::chrono::January, std::chrono::day{3}};
}

void PriceSeries::rebuild_times() {
    times_.resize(log_price_.size());
    for (std::size_t i = 0; i < times_.size(); ++i) times_[i] = time_origin_ + static_cast<double>(i);
}

PriceSeries PriceSeries::shifted(double delta) const {
    PriceSeries out = *this;
    out.time_origin_ = time_origin_ + delta;
    out.rebuild_times();
    return out;
}

PriceSeries PriceSeries::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("price series: scale factor must be positive");
    PriceSeries out = *this;
    const double shift = std::log(factor);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.prices_[i] *= factor;
        out.log_price_[i] += shift;
    }
    return out;
}

std::ptrdiff_t PriceSeries::index_of(const Date& d) const {
    const auto it = std::lower_bound(dates_.begin(), dates_.end(), d,
                                     [](const Date& a, const Date& b) { return sys_days{a} < sys_days{b}; });
    if (it == dates_.end() || sys_days{*it} != sys_days{d}) return -1;
    return it - dates_.begin();
}

// ---------------------------------------------------------------------------

void FitWindow::validate(const PriceSeries& series, std::size_t min_span) const {
    if (end_index >= series.size() || start_index > end_index)
        throw std::invalid_argument("fit window out of range");
    if (end_index - start_index < min_span) {
        std::ostringstream msg;
        msg << "fit window spans " << (end_index - start_index) << " steps; at least " << min_span
            << " required";
        throw std::invalid_argument(msg.str());
    }
}

FitWindow full_window(const PriceSeries& series) {
    if (series.size() == 0) throw EmptyWindowError("empty series");
    return {0, series.size() - 1};
}

FitWindow slice_window(const PriceSeries& series, const Date& t1, const Date& t2) {
    const auto& dates = series.dates();
    if (dates.empty()) throw EmptyWindowError("empty series");
    const sys_days lo{t1}, hi{t2};
    if (lo < sys_days{dates.front()} || hi > sys_days{dates.back()})
        throw std::out_of_range("window dates outside the series range " +
                                format_iso_date(dates.front()) + " .. " + format_iso_date(dates.back()));
    const auto less = [](const Date& a, const Date& b) { return sys_days{a} < sys_days{b}; };
    const auto first = std::lower_bound(dates.begin(), dates.end(), t1, less);
    const auto past = std::upper_bound(dates.begin(), dates.end(), t2, less);
    if (first >= past)
        throw EmptyWindowError("no observations between " + format_iso_date(t1) + " and " +
                               format_iso_date(t2));
    return {static_cast<std::size_t>(first - dates.begin()),
            static_cast<std::size_t>(past - dates.begin()) - 1};
}

// ---------------------------------------------------------------------------

PriceSeries load_csv(std::istream& in) {
    struct Row {
        Date date;
        double price;
        std::size_t line;
    };
    std::vector<Row> rows;
    std::string raw;
    std::size_t line_no = 0;
    bool seen_content = false;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;

        const auto comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
            throw ParseError(at_line(line_no, "expected exactly two comma-separated fields"), line_no);
        const auto date_field = trim(line.substr(0, comma));
        const auto price_field = trim(line.substr(comma + 1));

        double price = 0.0;
        const bool numeric = parse_number(price_field, price);
        if (!seen_content) {
            seen_content = true;
            if (!numeric) continue;  // header row
        }
        if (!numeric)
            throw ParseError(at_line(line_no, "invalid price '" + std::string(price_field) + "'"), line_no);

        Date date;
        if (!parse_iso_date(date_field, date))
            throw ParseError(at_line(line_no, "invalid date '" + std::string(date_field) +
                                                  "' (expected YYYY-MM-DD)"),
                             line_no);
        if (!(price > 0.0))
            throw NonPositivePriceError(at_line(line_no, "price must be positive"), line_no);
        rows.push_back({date, price, line_no});
    }
    if (in.bad()) throw ParseError("read failure", line_no);

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return sys_days{a.date} < sys_days{b.date}; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (sys_days{rows[i].date} == sys_days{rows[i - 1].date})
            throw DuplicateDateError(at_line(rows[i].line, "duplicate date " + format_iso_date(rows[i].date) +
                                                               " (first seen on line " +
                                                               std::to_string(rows[i - 1].line) + ")"),
                                     rows[i].line);
    if (rows.size() < 2) throw ParseError("at least two data rows required", 0);

    std::vector<Date> dates;
    std::vector<double> prices;
    dates.reserve(rows.size());
    prices.reserve(rows.size());
    for (const auto& r : rows) {
        dates.push_back(r.date);
        prices.push_back(r.price);
    }
    return PriceSeries(std::move(dates), std::move(prices));
}

PriceSeries load_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    return load_csv(in);
}

void write_csv(const PriceSeries& series, std::ostream& out) {
    out << "date,price\n";
    char buf[40];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", series.prices()[i]);
        out << format_iso_date(series.dates()[i]) << ',' << buf << '\n';
    }
}

void write_csv_file(const PriceSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    write_csv(series, out);
    if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

// ---------------------------------------------------------------------------

PriceSeries synth_generate(const SynthSpec& spec) {
    if (spec.n_points < 2) throw std::invalid_argument("synthetic series needs at least 2 points");
    if (!(spec.noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
    const double last = static_cast<double>(spec.n_points - 1);
    if (!(spec.params.tc > last))
        throw DomainError("synthetic t_c must lie beyond the last generated index");

    RandomStream rng(spec.rng_seed, 0);
    std::vector<double> log_prices(spec.n_points);
    for (std::size_t i = 0; i < spec.n_points; ++i) {
        log_prices[i] = eval_lppl_phase(spec.params, static_cast<double>(i));
        if (spec.noise_sigma > 0.0) log_prices[i] += spec.noise_sigma * rng.normal();
    }
    return PriceSeries::from_log_prices(std::move(log_prices), spec.start_date);
}

}  // namespace lppl
