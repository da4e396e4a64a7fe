#include "lppl/optimizer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace lppl;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double rosenbrock(std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

// Interior minima of f sampled on a uniform grid of [lo, hi]. A run of equal
// values counts once (at its midpoint) if both outer neighbours are larger.
std::vector<double> grid_minima_1d(double (*f)(double), double lo, double hi, int points) {
    std::vector<double> x(points), v(points);
    for (int i = 0; i < points; ++i) {
        x[i] = lo + (hi - lo) * i / (points - 1);
        v[i] = f(x[i]);
    }
    std::vector<double> out;
    for (int i = 1; i + 1 < points;) {
        int j = i;
        while (j + 1 < points && v[j + 1] == v[i]) ++j;
        if (j + 1 < points && v[i] < v[i - 1] && v[i] < v[j + 1]) out.push_back(0.5 * (x[i] + x[j]));
        i = j + 1;
    }
    return out;
}

double cos3(double x) { return std::cos(3.0 * x); }

Objective boxed_cos3() {
    return [](std::span<const double> x) {
        if (x[0] < 0.0 || x[0] > kTwoPi) return kPenaltyValue;
        return std::cos(3.0 * x[0]);
    };
}

struct Well {
    double x, y, depth;
};

// Piecewise quadratic with one basin per well. The wells are tilted ellipses so
// that a simplex placed symmetrically about one cannot have equal values at
// every vertex (which would satisfy the f-spread test prematurely).
Objective wells_objective(const std::vector<Well>& wells) {
    return [wells](std::span<const double> p) {
        double best = INFINITY;
        for (const auto& w : wells) {
            const double dx = p[0] - w.x, dy = p[1] - w.y;
            best = std::min(best, dx * dx + 1.7 * dy * dy + 0.6 * dx * dy + w.depth);
        }
        return best;
    };
}

}  // namespace

TEST(LocalMinimize, OneDimensionalQuadratic) {
    const Objective f = [](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); };
    const std::vector<double> x0{0.0}, step{0.5};
    const auto r = local_minimize(f, x0, step, OptimizerConfig{});
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.location[0], 3.0, 1e-6);
    EXPECT_EQ(r.start_count, 1);
    EXPECT_GT(r.evaluations, 0u);
}

TEST(LocalMinimize, Rosenbrock) {
    const std::vector<double> x0{-1.2, 1.0}, step{0.1, 0.1};
    OptimizerConfig cfg;
    cfg.f_tolerance = 1e-14;
    const auto r = local_minimize(rosenbrock, x0, step, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.location[0], 1.0, 1e-4);
    EXPECT_NEAR(r.location[1], 1.0, 1e-4);
}

TEST(LocalMinimize, NeverWorseThanStart) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const Objective f = [](std::span<const double> x) {
        return std::sin(3 * x[0]) * std::cos(2 * x[1]) + 0.1 * (x[0] * x[0] + x[1] * x[1]);
    };
    for (int k = 0; k < 200; ++k) {
        const std::vector<double> x0{u(gen), u(gen)}, step{0.3, 0.3};
        const auto r = local_minimize(f, x0, step, OptimizerConfig{});
        EXPECT_LE(r.value, f(x0));
    }
}

TEST(LocalMinimize, NonFiniteValuesArePenalized) {
    // undefined left of zero; the constrained minimum sits on the boundary
    const Objective f = [](std::span<const double> x) {
        return x[0] < 0.0 ? std::nan("") : (x[0] + 1.0) * (x[0] + 1.0);
    };
    const std::vector<double> x0{2.0}, step{0.5};
    const auto r = local_minimize(f, x0, step, OptimizerConfig{});
    EXPECT_TRUE(std::isfinite(r.value));
    EXPECT_LT(r.value, kPenaltyValue);
    EXPECT_GE(r.location[0], 0.0);
    EXPECT_LT(r.location[0], 1e-6);
}

TEST(LocalMinimize, ReportsNonConvergence) {
    const std::vector<double> x0{-1.2, 1.0}, step{0.1, 0.1};
    OptimizerConfig cfg;
    cfg.max_iterations = 5;
    const auto r = local_minimize(rosenbrock, x0, step, cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_LE(r.value, rosenbrock(x0));
}

TEST(LocalMinimize, Deterministic) {
    const std::vector<double> x0{-1.2, 1.0}, step{0.1, 0.1};
    const auto a = local_minimize(rosenbrock, x0, step, OptimizerConfig{});
    const auto b = local_minimize(rosenbrock, x0, step, OptimizerConfig{});
    EXPECT_EQ(a.location, b.location);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(LocalMinimize, BoxSetsInitialStep) {
    const Objective f = [](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); };
    const SearchBox box{{0.0}, {10.0}};
    const std::vector<double> x0{1.0};
    const auto r = local_minimize(f, x0, box, OptimizerConfig{});
    EXPECT_NEAR(r.location[0], 3.0, 1e-6);
}

TEST(SearchBox, Validation) {
    EXPECT_THROW((SearchBox{{0.0}, {0.0}}.validate()), std::invalid_argument);
    EXPECT_THROW((SearchBox{{1.0}, {0.0}}.validate()), std::invalid_argument);
    EXPECT_THROW((SearchBox{{0.0, 0.0}, {1.0}}.validate()), std::invalid_argument);
    EXPECT_THROW((SearchBox{{}, {}}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((SearchBox{{0.0, -1.0}, {1.0, 1.0}}.validate()));
    const SearchBox box{{0.0, 0.0}, {1.0, 2.0}};
    EXPECT_TRUE(box.contains(std::vector<double>{0.5, 2.0}));
    EXPECT_FALSE(box.contains(std::vector<double>{0.5, 2.1}));
}

TEST(OptimizerConfig, Validation) {
    OptimizerConfig c;
    EXPECT_NO_THROW(c.validate());
    c.n_starts = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.x_tolerance = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.max_iterations = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(OptimizerConfig, Defaults) {
    const OptimizerConfig c;
    EXPECT_EQ(c.max_iterations, 2000);
    EXPECT_EQ(c.x_tolerance, 1e-8);
    EXPECT_EQ(c.f_tolerance, 1e-10);
    EXPECT_EQ(c.n_starts, 20);
}

TEST(MultistartPoint, SeededAndInsideBox) {
    const SearchBox box{{0.1, 6.0}, {0.9, 13.0}};
    for (std::size_t i = 0; i < 100; ++i) {
        const auto a = multistart_point(box, 42, i);
        EXPECT_TRUE(box.contains(a));
        EXPECT_EQ(a, multistart_point(box, 42, i));
        EXPECT_NE(a, multistart_point(box, 43, i));
        EXPECT_NE(a, multistart_point(box, 42, i + 1));
    }
}

TEST(Multistart, ConvexQuadraticHasOneCluster) {
    const Objective f = [](std::span<const double> x) {
        return (x[0] - 0.3) * (x[0] - 0.3) + 2.0 * (x[1] - 9.0) * (x[1] - 9.0);
    };
    const SearchBox box{{0.1, 6.0}, {0.9, 13.0}};
    OptimizerConfig cfg;
    cfg.cluster_tolerance = {0.02, 0.2};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.rng_seed = seed;
        const auto r = multistart(f, box, cfg);
        ASSERT_EQ(r.size(), 1u) << "seed " << seed;
        EXPECT_EQ(r[0].start_count, cfg.n_starts);
        EXPECT_NEAR(r[0].location[0], 0.3, 1e-5);
        EXPECT_NEAR(r[0].location[1], 9.0, 1e-5);
    }
}

TEST(Multistart, CosineMinimaMatchBruteForce) {
    const auto reference = grid_minima_1d(cos3, 0.0, kTwoPi, 10000);
    // pi/3, pi and 5pi/3 are all interior to [0, 2pi]
    ASSERT_EQ(reference.size(), 3u);
    const SearchBox box{{0.0}, {kTwoPi}};
    OptimizerConfig cfg;
    cfg.cluster_tolerance = {0.05};
    for (std::uint64_t seed : {1u, 2u, 3u, 42u}) {
        cfg.rng_seed = seed;
        auto r = multistart(boxed_cos3(), box, cfg);
        ASSERT_EQ(r.size(), reference.size()) << "seed " << seed;
        std::sort(r.begin(), r.end(),
                  [](const LocalMinimum& a, const LocalMinimum& b) { return a.location[0] < b.location[0]; });
        for (std::size_t i = 0; i < r.size(); ++i) {
            EXPECT_NEAR(r[i].location[0], reference[i], cfg.cluster_tolerance[0]);
            EXPECT_NEAR(r[i].value, -1.0, 1e-9);
        }
    }
}

TEST(Multistart, ClusterCountMatchesGridBasins) {
    const std::vector<Well> wells{{0.2, 0.2, 0.0}, {0.8, 0.25, 0.01}, {0.5, 0.8, 0.02}, {0.15, 0.75, 0.03}};
    const auto f = wells_objective(wells);
    const SearchBox box{{0.0, 0.0}, {1.0, 1.0}};

    // brute-force basin count: strict local minima on a 201 x 201 grid
    const int g = 201;
    std::vector<double> v(g * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const std::vector<double> p{i / double(g - 1), j / double(g - 1)};
            v[i * g + j] = f(p);
        }
    int basins = 0;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            bool is_min = true;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = i + di, b = j + dj;
                    if ((di || dj) && a >= 0 && b >= 0 && a < g && b < g && !(v[i * g + j] < v[a * g + b]))
                        is_min = false;
                }
            basins += is_min;
        }
    ASSERT_EQ(basins, static_cast<int>(wells.size()));

    OptimizerConfig cfg;
    cfg.n_starts = 200;
    cfg.cluster_tolerance = {0.05, 0.05};  // wells are > 0.3 apart
    const auto r = multistart(f, box, cfg);
    EXPECT_EQ(static_cast<int>(r.size()), basins);
    int starts = 0;
    for (const auto& c : r) starts += c.start_count;
    EXPECT_EQ(starts, cfg.n_starts);
    EXPECT_NEAR(r.front().value, 0.0, 1e-10);
}

TEST(Multistart, SortedByValue) {
    const std::vector<Well> wells{{0.2, 0.2, 0.3}, {0.8, 0.8, 0.1}, {0.2, 0.8, 0.2}};
    OptimizerConfig cfg;
    cfg.n_starts = 60;
    const auto r = multistart(wells_objective(wells), SearchBox{{0, 0}, {1, 1}}, cfg);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_TRUE(std::is_sorted(r.begin(), r.end(),
                               [](const LocalMinimum& a, const LocalMinimum& b) { return a.value < b.value; }));
}

TEST(Multistart, DeterministicPerSeed) {
    const Objective f = [](std::span<const double> x) {
        return std::sin(5 * x[0]) * std::cos(3 * x[1]) + 0.05 * x[0] * x[1];
    };
    const SearchBox box{{-2.0, -2.0}, {2.0, 2.0}};
    OptimizerConfig cfg;
    cfg.rng_seed = 99;
    const auto a = multistart(f, box, cfg);
    const auto b = multistart(f, box, cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].location, b[i].location);
        EXPECT_EQ(a[i].value, b[i].value);
        EXPECT_EQ(a[i].start_count, b[i].start_count);
    }
    cfg.rng_seed = 100;
    const auto c = multistart(f, box, cfg);
    bool differs = c.size() != a.size();
    for (std::size_t i = 0; !differs && i < a.size(); ++i) differs = a[i].location != c[i].location;
    EXPECT_TRUE(differs);
}

TEST(Multistart, ExtraStartsAreUsed) {
    const std::vector<Well> wells{{0.1, 0.1, 0.0}, {0.9, 0.9, 0.5}};
    OptimizerConfig cfg;
    cfg.n_starts = 1;
    cfg.rng_seed = 0;
    const std::vector<std::vector<double>> extra{{0.05, 0.05}, {0.95, 0.95}};
    const auto r = multistart(wells_objective(wells), SearchBox{{0, 0}, {1, 1}}, cfg, extra);
    ASSERT_EQ(r.size(), 2u);
    // the offset well is only resolved to about sqrt(f_tolerance * 0.5)
    EXPECT_NEAR(r[0].location[0], 0.1, 1e-5);
    EXPECT_NEAR(r[1].location[0], 0.9, 1e-4);
    EXPECT_NEAR(r[1].location[1], 0.9, 1e-4);
}

TEST(Multistart, AllStartsFailingGivesEmptyResult) {
    const Objective f = [](std::span<const double>) { return std::nan(""); };
    const auto r = multistart(f, SearchBox{{0.0}, {1.0}}, OptimizerConfig{});
    EXPECT_TRUE(r.empty());
}

TEST(ClusterMinima, OrderIndependent) {
    std::vector<LocalMinimum> in;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        LocalMinimum m;
        const int basin = i % 4;
        m.location = {basin + 0.01 * u(gen), 0.01 * u(gen)};
        m.value = basin + 1e-3 * u(gen);
        m.converged = true;
        in.push_back(m);
    }
    const std::vector<double> tol{0.1, 0.1};
    const auto ref = cluster_minima(in, tol);
    ASSERT_EQ(ref.size(), 4u);
    for (int rep = 0; rep < 20; ++rep) {
        std::shuffle(in.begin(), in.end(), gen);
        const auto r = cluster_minima(in, tol);
        ASSERT_EQ(r.size(), ref.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            EXPECT_EQ(r[i].location, ref[i].location);
            EXPECT_EQ(r[i].value, ref[i].value);
            EXPECT_EQ(r[i].start_count, ref[i].start_count);
        }
    }
    for (const auto& c : ref) EXPECT_EQ(c.start_count, 10);
}

TEST(ClusterMinima, DropsPenalizedResults) {
    LocalMinimum good;
    good.location = {0.0};
    good.value = 1.0;
    LocalMinimum bad;
    bad.location = {5.0};
    bad.value = kPenaltyValue;
    const std::vector<double> tol{0.1};
    const auto r = cluster_minima({good, bad}, tol);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].value, 1.0);
}
