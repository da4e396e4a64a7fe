#include "lppl/optimizer.hpp"

#include "lppl/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lppl {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Vertex {
    std::vector<double> x;
    double f;
};

class CountingObjective {
public:
    explicit CountingObjective(const Objective& objective) : objective_(objective) {}

    double operator()(std::span<const double> x) {
        ++count_;
        const double v = objective_(x);
        return std::isfinite(v) ? std::min(v, kPenaltyValue) : kPenaltyValue;
    }

    std::size_t count() const noexcept { return count_; }

private:
    const Objective& objective_;
    std::size_t count_ = 0;
};

bool converged(const std::vector<Vertex>& simplex, const OptimizerConfig& config) {
    const Vertex& best = simplex.front();
    double x_spread = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i)
        for (std::size_t d = 0; d < best.x.size(); ++d)
            x_spread = std::max(x_spread, std::abs(simplex[i].x[d] - best.x[d]));
    if (x_spread <= config.x_tolerance) return true;

    const double f_lo = best.f;
    const double f_hi = simplex.back().f;
    if (f_hi >= kPenaltyValue) return false;
    const double scale = 0.5 * (std::abs(f_lo) + std::abs(f_hi));
    return (f_hi - f_lo) <= config.f_tolerance * scale;
}

void sort_simplex(std::vector<Vertex>& simplex) {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
}

// One Nelder-Mead run; `iterations` is the shared budget.
void run_simplex(CountingObjective& f, std::vector<Vertex>& simplex, const OptimizerConfig& config,
                 int& iterations, bool& done) {
    const std::size_t n = simplex.front().x.size();
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto point = [&](double coef, const std::vector<double>& from, std::vector<double>& out) {
        for (std::size_t d = 0; d < n; ++d) out[d] = centroid[d] + coef * (from[d] - centroid[d]);
    };

    sort_simplex(simplex);
    while (iterations < config.max_iterations) {
        if (converged(simplex, config)) {
            done = true;
            return;
        }
        ++iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i].x[d];
        for (double& c : centroid) c /= static_cast<double>(n);

        Vertex& worst = simplex.back();
        const double f_best = simplex.front().f;
        const double f_second = simplex[n - 1].f;

        point(-kReflect, worst.x, trial);
        const double f_reflect = f(trial);

        if (f_reflect < f_best) {
            point(-kReflect * kExpand, worst.x, trial2);
            const double f_expand = f(trial2);
            if (f_expand < f_reflect) {
                worst.x = trial2;
                worst.f = f_expand;
            } else {
                worst.x = trial;
                worst.f = f_reflect;
            }
        } else if (f_reflect < f_second) {
            worst.x = trial;
            worst.f = f_reflect;
        } else {
            bool accepted = false;
            if (f_reflect < worst.f) {
                point(-kReflect * kContract, worst.x, trial2);
                const double f_out = f(trial2);
                if (f_out <= f_reflect) {
                    worst.x = trial2;
                    worst.f = f_out;
                    accepted = true;
                }
            } else {
                point(kContract, worst.x, trial2);
                const double f_in = f(trial2);
                if (f_in < worst.f) {
                    worst.x = trial2;
                    worst.f = f_in;
                    accepted = true;
                }
            }
            if (!accepted) {
                const std::vector<double> best = simplex.front().x;
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t d = 0; d < n; ++d)
                        simplex[i].x[d] = best[d] + kShrink * (simplex[i].x[d] - best[d]);
                    simplex[i].f = f(simplex[i].x);
                }
            }
        }
        sort_simplex(simplex);
    }
    done = converged(simplex, config);
}

std::vector<Vertex> initial_simplex(CountingObjective& f, std::span<const double> x0,
                                    std::span<const double> step) {
    const std::size_t n = x0.size();
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    std::vector<double> base(x0.begin(), x0.end());
    simplex.push_back({base, f(base)});
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v = base;
        v[i] += step[i];
        const double fv = f(v);
        simplex.push_back({std::move(v), fv});
    }
    return simplex;
}

bool lexicographic_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

void SearchBox::validate() const {
    if (lower.size() != upper.size() || lower.empty())
        throw std::invalid_argument("search box: bound vectors must be non-empty and equal length");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("search box: lower bound must be below upper bound");
}

bool SearchBox::contains(std::span<const double> x) const {
    if (x.size() != dims()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
}

void OptimizerConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
    if (!(x_tolerance > 0.0) || !(f_tolerance > 0.0))
        throw std::invalid_argument("tolerances must be positive");
    if (n_starts < 1) throw std::invalid_argument("n_starts must be at least 1");
    if (!(initial_step_fraction > 0.0))
        throw std::invalid_argument("initial_step_fraction must be positive");
    if (restarts < 0) throw std::invalid_argument("restarts must be non-negative");
    for (double t : cluster_tolerance)
        if (!(t > 0.0)) throw std::invalid_argument("cluster tolerance must be positive");
}

LocalMinimum local_minimize(const Objective& objective, std::span<const double> x0,
                            std::span<const double> step, const OptimizerConfig& config) {
    if (x0.empty() || step.size() != x0.size())
        throw std::invalid_argument("local_minimize: start and step dimensions differ");
    CountingObjective f(objective);
    auto simplex = initial_simplex(f, x0, step);

    int iterations = 0;
    bool done = false;
    run_simplex(f, simplex, config, iterations, done);

    // Restart around the incumbent; Nelder-Mead can stall on a degenerate simplex.
    for (int r = 0; r < config.restarts && done && iterations < config.max_iterations; ++r) {
        const Vertex incumbent = simplex.front();
        std::vector<double> restart_step(step.begin(), step.end());
        for (double& s : restart_step) s *= 0.1;
        auto fresh = initial_simplex(f, incumbent.x, restart_step);
        fresh.front().f = incumbent.f;
        simplex = std::move(fresh);
        run_simplex(f, simplex, config, iterations, done);
        const double gain = incumbent.f - simplex.front().f;
        if (!(gain > config.f_tolerance * std::abs(incumbent.f))) break;
    }

    LocalMinimum out;
    out.location = simplex.front().x;
    out.value = simplex.front().f;
    out.converged = done;
    out.evaluations = f.count();
    return out;
}

LocalMinimum local_minimize(const Objective& objective, std::span<const double> x0,
                            const SearchBox& box, const OptimizerConfig& config) {
    box.validate();
    std::vector<double> step(box.dims());
    for (std::size_t i = 0; i < box.dims(); ++i)
        step[i] = config.initial_step_fraction * box.width(i);
    return local_minimize(objective, x0, step, config);
}

std::vector<double> multistart_point(const SearchBox& box, std::uint64_t seed, std::size_t index) {
    RandomStream rng(seed, index);
    std::vector<double> x(box.dims());
    for (std::size_t d = 0; d < box.dims(); ++d) x[d] = rng.uniform(box.lower[d], box.upper[d]);
    return x;
}

std::vector<LocalMinimum> cluster_minima(std::vector<LocalMinimum> results,
                                         std::span<const double> tolerance) {
    std::erase_if(results, [](const LocalMinimum& r) {
        return !std::isfinite(r.value) || r.value >= kPenaltyValue;
    });
    std::sort(results.begin(), results.end(), [](const LocalMinimum& a, const LocalMinimum& b) {
        if (a.value != b.value) return a.value < b.value;
        return lexicographic_less(a.location, b.location);
    });

    std::vector<LocalMinimum> clusters;
    for (auto& r : results) {
        auto same = [&](const LocalMinimum& c) {
            for (std::size_t d = 0; d < r.location.size(); ++d)
                if (!(std::abs(r.location[d] - c.location[d]) < tolerance[d])) return false;
            return true;
        };
        auto it = std::find_if(clusters.begin(), clusters.end(), same);
        if (it == clusters.end()) {
            clusters.push_back(std::move(r));
        } else {
            it->start_count += r.start_count;
            it->evaluations += r.evaluations;
            it->converged = it->converged || r.converged;
        }
    }
    return clusters;
}

std::vector<LocalMinimum> multistart(const Objective& objective, const SearchBox& box,
                                     const OptimizerConfig& config,
                                     std::span<const std::vector<double>> extra_starts) {
    box.validate();
    config.validate();
    std::vector<double> tolerance = config.cluster_tolerance;
    if (tolerance.empty()) {
        tolerance.resize(box.dims());
        for (std::size_t d = 0; d < box.dims(); ++d) tolerance[d] = 0.01 * box.width(d);
    }
    if (tolerance.size() != box.dims())
        throw std::invalid_argument("cluster tolerance dimension differs from box");

    std::vector<LocalMinimum> results;
    results.reserve(static_cast<std::size_t>(config.n_starts) + extra_starts.size());
    for (int s = 0; s < config.n_starts; ++s) {
        const auto x0 = multistart_point(box, config.rng_seed, static_cast<std::size_t>(s));
        results.push_back(local_minimize(objective, x0, box, config));
    }
    for (const auto& x0 : extra_starts) results.push_back(local_minimize(objective, x0, box, config));

    std::size_t failed_evaluations = 0;
    for (const auto& r : results)
        if (!(r.value < kPenaltyValue)) failed_evaluations += r.evaluations;
    auto clusters = cluster_minima(std::move(results), tolerance);
    // keep the evaluation total intact when some starts only saw penalties
    if (!clusters.empty()) clusters.front().evaluations += failed_evaluations;
    return clusters;
}

}  // namespace lppl
