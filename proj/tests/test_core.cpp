#include "lppl/core.hpp"
#include "lppl/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace lppl;

namespace {

constexpr double kPi = std::numbers::pi;

LpplParams cartesian(double tc, double m, double omega, double A, double B, double C1, double C2) {
    return LpplParams{tc, m, omega, A, B, C1, C2};
}

bool has_violation(const QualificationReport& r, const std::string& param) {
    for (const auto& v : r.violations)
        if (v.parameter == param) return true;
    return false;
}

}  // namespace

TEST(EvalLppl, ConstantWhenOnlyOffset) {
    EXPECT_EQ(eval_lppl(cartesian(10.0, 0.37, 11.0, 10.0, 0.0, 0.0, 0.0), 5.0), 10.0);
}

TEST(EvalLppl, UnitDistanceCollapsesPowersAndLog) {
    EXPECT_NEAR(eval_lppl(cartesian(1.0, 0.7, 7.5, 10.0, -2.0, 0.3, 0.1), 0.0), 8.3, 1e-14);
}

TEST(EvalLppl, SquareRootPowerLaw) {
    EXPECT_NEAR(eval_lppl(cartesian(4.0, 0.5, 9.0, 8.5, -1.0, 0.0, 0.0), 0.0), 6.5, 1e-14);
}

TEST(EvalLppl, RejectsTimesAtOrPastCritical) {
    const auto p = cartesian(10.0, 0.5, 8.0, 1.0, -1.0, 0.1, 0.1);
    EXPECT_THROW(eval_lppl(p, 10.0), DomainError);
    EXPECT_THROW(eval_lppl(p, 11.0), DomainError);
    EXPECT_THROW(eval_lppl(p, 10.0 - 1e-9), DomainError);
    EXPECT_NO_THROW(eval_lppl(p, 10.0 - 1e-6));
}

TEST(EvalLppl, NegativeExponentAllowed) {
    const double v = eval_lppl(cartesian(2.0, -0.5, 0.0, 0.0, 1.0, 0.0, 0.0), 1.0);
    EXPECT_NEAR(v, 1.0, 1e-15);
    EXPECT_NEAR(eval_lppl(cartesian(4.0, -0.5, 0.0, 0.0, 1.0, 0.0, 0.0), 0.0), 0.5, 1e-15);
}

TEST(EvalLpplPhase, ZeroAmplitudeIsPurePowerLaw) {
    const PhaseParams p{50.0, 0.4, 8.0, 3.0, -0.7, 0.0, 2.1};
    for (double t : {0.0, 10.0, 49.5})
        EXPECT_NEAR(eval_lppl_phase(p, t), 3.0 - 0.7 * std::pow(50.0 - t, 0.4), 1e-13);
}

TEST(EvalLpplPhase, UnitDistanceZeroPhase) {
    const PhaseParams p{1.0, 0.6, 9.0, 2.0, -0.5, 0.3, 0.0};
    EXPECT_NEAR(eval_lppl_phase(p, 0.0), 2.0 - 0.5 + 0.3, 1e-14);
}

TEST(EvalLpplPhase, MatchesCartesianForm) {
    RandomStream rng(11, 0);
    for (int k = 0; k < 2000; ++k) {
        const PhaseParams p{rng.uniform(10.0, 300.0), rng.uniform(0.05, 1.2), rng.uniform(2.0, 20.0),
                            rng.uniform(-10.0, 10.0), rng.uniform(-3.0, 3.0), rng.uniform(0.0, 2.0),
                            rng.uniform(0.0, 2.0 * kPi)};
        const double t = p.tc - std::exp(rng.uniform(std::log(1e-3), std::log(p.tc)));
        const double a = eval_lppl_phase(p, t);
        // independent evaluation of the cartesian form
        const double x = p.tc - t;
        const double xm = std::pow(x, p.m);
        const double c1 = p.C * std::cos(p.phi), c2 = p.C * std::sin(p.phi);
        const double b = p.A + p.B * xm + c1 * xm * std::cos(p.omega * std::log(x)) +
                         c2 * xm * std::sin(p.omega * std::log(x));
        EXPECT_LE(std::abs(a - b), 1e-10 * (1.0 + std::abs(b)));
        EXPECT_LE(std::abs(a - eval_lppl(to_cartesian(p), t)), 1e-10 * (1.0 + std::abs(a)));
    }
}

TEST(PhaseToCartesian, Examples) {
    auto a = phase_to_cartesian(1.0, 0.0);
    EXPECT_DOUBLE_EQ(a.C1, 1.0);
    EXPECT_DOUBLE_EQ(a.C2, 0.0);
    a = phase_to_cartesian(2.0, kPi / 2);
    EXPECT_NEAR(a.C1, 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(a.C2, 2.0);
    a = phase_to_cartesian(0.5, kPi);
    EXPECT_DOUBLE_EQ(a.C1, -0.5);
    EXPECT_NEAR(a.C2, 0.0, 1e-15);
}

TEST(CartesianToPhase, Examples) {
    auto p = cartesian_to_phase(1.0, 0.0);
    EXPECT_DOUBLE_EQ(p.C, 1.0);
    EXPECT_DOUBLE_EQ(p.phi, 0.0);
    p = cartesian_to_phase(0.0, 2.0);
    EXPECT_DOUBLE_EQ(p.C, 2.0);
    EXPECT_DOUBLE_EQ(p.phi, kPi / 2);
    p = cartesian_to_phase(0.0, 0.0);
    EXPECT_EQ(p.C, 0.0);
    EXPECT_EQ(p.phi, 0.0);
}

TEST(CartesianToPhase, PhaseAlwaysNormalized) {
    for (double c1 : {-1.0, -0.0, 0.0, 1.0})
        for (double c2 : {-1.0, -1e-300, 0.0, 1e-300, 1.0}) {
            const auto p = cartesian_to_phase(c1, c2);
            EXPECT_GE(p.phi, 0.0);
            EXPECT_LT(p.phi, 2.0 * kPi);
            EXPECT_GE(p.C, 0.0);
        }
}

TEST(Conversion, RoundTripIsIdentity) {
    RandomStream rng(5, 1);
    for (int k = 0; k < 10000; ++k) {
        const double C = rng.uniform(0.0, 5.0);
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const auto xy = phase_to_cartesian(C, phi);
        const auto back = cartesian_to_phase(xy.C1, xy.C2);
        EXPECT_NEAR(back.C, C, 1e-12);
        // compare on the circle so 2pi - eps and 0 agree
        const double d = std::remainder(back.phi - phi, 2.0 * kPi);
        EXPECT_LE(std::abs(d), 1e-12);
    }
}

TEST(Conversion, ParamsRoundTrip) {
    const PhaseParams p{120.0, 0.45, 7.7, 5.0, -0.3, 0.04, 5.5};
    const PhaseParams q = to_phase(to_cartesian(p));
    EXPECT_EQ(q.tc, p.tc);
    EXPECT_EQ(q.m, p.m);
    EXPECT_EQ(q.omega, p.omega);
    EXPECT_EQ(q.A, p.A);
    EXPECT_EQ(q.B, p.B);
    EXPECT_NEAR(q.C, p.C, 1e-15);
    EXPECT_NEAR(q.phi, p.phi, 1e-12);
}

TEST(NormalizePhase, WrapsIntoHalfOpenInterval) {
    EXPECT_DOUBLE_EQ(normalize_phase(0.0), 0.0);
    EXPECT_NEAR(normalize_phase(-kPi / 2), 1.5 * kPi, 1e-15);
    EXPECT_NEAR(normalize_phase(5.0 * kPi), kPi, 1e-14);
    EXPECT_LT(normalize_phase(2.0 * kPi), 2.0 * kPi);
    EXPECT_LT(normalize_phase(std::nextafter(2.0 * kPi, 0.0)), 2.0 * kPi);
    EXPECT_GE(normalize_phase(-1e-18), 0.0);
    EXPECT_LT(normalize_phase(-1e-18), 2.0 * kPi);
}

TEST(HazardRate, PurePowerLaw) {
    HazardParams h;
    h.alpha = 1.0;
    h.beta = 0.0;
    h.m = 0.5;
    h.tc = 4.0;
    EXPECT_NEAR(hazard_rate(h, 0.0), 0.5, 1e-15);
}

TEST(HazardRate, RejectsTimesPastCritical) {
    HazardParams h;
    h.tc = 1.0;
    EXPECT_THROW(hazard_rate(h, 1.0), DomainError);
}

namespace {

double min_hazard_on_grid(const HazardParams& h, int points) {
    double lo = INFINITY;
    // logarithmic grid in t_c - t so that every oscillation is resolved
    for (int i = 0; i < points; ++i) {
        const double x = std::exp(std::log(1e-4) + (std::log(1e3) - std::log(1e-4)) * i / (points - 1));
        lo = std::min(lo, hazard_rate(h, h.tc - x));
    }
    return lo;
}

}  // namespace

TEST(HazardRate, NonNegativeWhenBetaAtMostOne) {
    RandomStream rng(3, 0);
    for (int k = 0; k < 50; ++k) {
        HazardParams h;
        h.alpha = rng.uniform(0.01, 5.0);
        h.beta = rng.uniform(-1.0, 1.0);
        if (k == 0) h.beta = 1.0;
        if (k == 1) h.beta = -1.0;
        h.m = rng.uniform(0.1, 0.9);
        h.omega = rng.uniform(6.0, 13.0);
        h.tc = 1000.0;
        h.phi_h = rng.uniform(0.0, 2.0 * kPi);
        EXPECT_GE(min_hazard_on_grid(h, 20000), 0.0);
    }
}

TEST(HazardRate, NegativeSomewhereWhenBetaExceedsOne) {
    RandomStream rng(4, 0);
    for (int k = 0; k < 50; ++k) {
        HazardParams h;
        h.alpha = rng.uniform(0.01, 5.0);
        h.beta = (k % 2 == 0 ? 1.0 : -1.0) * rng.uniform(1.05, 3.0);
        if (k == 0) h.beta = 1.5;
        h.m = rng.uniform(0.1, 0.9);
        h.omega = rng.uniform(6.0, 13.0);
        h.tc = 1000.0;
        h.phi_h = rng.uniform(0.0, 2.0 * kPi);
        EXPECT_LT(min_hazard_on_grid(h, 20000), 0.0) << "beta=" << h.beta;
    }
}

TEST(ImpliedBeta, Examples) {
    EXPECT_NEAR(implied_beta(-1.0, -0.5, 0.5, 0.0), 0.5, 1e-15);
    EXPECT_EQ(implied_beta(-1.3, 0.0, 0.4, 8.0), 0.0);
    EXPECT_NEAR(implied_beta(-2.0, -2.0, 1.0, 0.0), 1.0, 1e-15);
}

TEST(ImpliedBeta, RejectsZeroDenominators) {
    EXPECT_THROW(implied_beta(0.0, 0.1, 0.5, 8.0), std::invalid_argument);
    EXPECT_THROW(implied_beta(-1.0, 0.1, 0.0, 8.0), std::invalid_argument);
}

TEST(ImpliedBeta, InvariantUnderJointScaling) {
    RandomStream rng(8, 0);
    for (int k = 0; k < 1000; ++k) {
        const double B = rng.uniform(-3.0, -0.01), C = rng.uniform(-1.0, 1.0);
        const double m = rng.uniform(0.1, 0.9), w = rng.uniform(6.0, 13.0);
        double s = rng.uniform(-100.0, 100.0);
        if (std::abs(s) < 1e-3) s = 1e-3;
        const double b0 = implied_beta(B, C, m, w);
        EXPECT_NEAR(implied_beta(s * B, s * C, m, w), b0, 1e-13 * (1.0 + std::abs(b0)));
    }
}

TEST(Qualify, InsideAllBounds) {
    const auto r = qualify(cartesian(200.0, 0.5, 8.0, 5.0, -1.0, 0.2, 0.2), 150.0);
    EXPECT_TRUE(r.qualified);
    EXPECT_TRUE(r.violations.empty());
}

TEST(Qualify, ExponentBelowRange) {
    const auto r = qualify(cartesian(200.0, 0.05, 8.0, 5.0, -1.0, 0.2, 0.2), 150.0);
    EXPECT_FALSE(r.qualified);
    ASSERT_EQ(r.violations.size(), 1u);
    EXPECT_EQ(r.violations[0].parameter, "m");
    EXPECT_EQ(r.violations[0].bound, "m below 0.1");
    EXPECT_EQ(r.violations[0].value, 0.05);
}

TEST(Qualify, FrequencyAboveRange) {
    const auto r = qualify(cartesian(200.0, 0.5, 20.0, 5.0, -1.0, 0.2, 0.2), 150.0);
    EXPECT_FALSE(r.qualified);
    ASSERT_EQ(r.violations.size(), 1u);
    EXPECT_EQ(r.violations[0].parameter, "omega");
    EXPECT_EQ(r.violations[0].bound, "omega above 13");
}

TEST(Qualify, ListsEveryViolation) {
    const auto r = qualify(cartesian(100.0, 0.95, 5.0, 5.0, 0.5, 0.8, 0.8), 150.0);
    EXPECT_FALSE(r.qualified);
    EXPECT_EQ(r.violations.size(), 5u);
    for (const char* p : {"m", "omega", "C", "B", "tc"}) EXPECT_TRUE(has_violation(r, p)) << p;
}

TEST(Qualify, BoundsAreInclusiveExceptStrictOnes) {
    EXPECT_TRUE(qualify(cartesian(151.0, 0.1, 6.0, 0.0, -1.0, 0.0, 0.0), 150.0).qualified);
    EXPECT_TRUE(qualify(cartesian(151.0, 0.9, 13.0, 0.0, -1.0, 0.0, 0.0), 150.0).qualified);
    EXPECT_TRUE(has_violation(qualify(cartesian(151.0, 0.5, 8.0, 0.0, 0.0, 0.0, 0.0), 150.0), "B"));
    EXPECT_TRUE(has_violation(qualify(cartesian(151.0, 0.5, 8.0, 0.0, -1.0, 0.6, 0.8), 150.0), "C"));
    EXPECT_TRUE(has_violation(qualify(cartesian(150.0, 0.5, 8.0, 0.0, -1.0, 0.0, 0.0), 150.0), "tc"));
}

TEST(Qualify, QualifiedIffNoViolations) {
    RandomStream rng(21, 0);
    for (int k = 0; k < 5000; ++k) {
        const auto p = cartesian(rng.uniform(100.0, 300.0), rng.uniform(0.0, 1.0), rng.uniform(4.0, 15.0),
                                 0.0, rng.uniform(-1.0, 0.2), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const auto r = qualify(p, 150.0);
        EXPECT_EQ(r.qualified, r.violations.empty());
        const auto again = qualify(p, 150.0);
        ASSERT_EQ(again.violations.size(), r.violations.size());
        for (std::size_t i = 0; i < r.violations.size(); ++i) {
            EXPECT_EQ(again.violations[i].parameter, r.violations[i].parameter);
            EXPECT_EQ(again.violations[i].bound, r.violations[i].bound);
        }
    }
}
