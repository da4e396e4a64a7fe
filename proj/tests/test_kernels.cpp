#include "lppl/random.hpp"
#include "lppl/simd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

using namespace lppl;
using simd::Isa;
using simd::KernelTable;

namespace {

std::string isa_label(const testing::TestParamInfo<Isa>& info) {
    return std::string(simd::isa_name(info.param));
}

std::vector<double> log_inputs(RandomStream& rng, std::size_t n) {
    std::vector<double> x(n);
    for (auto& v : x) v = std::exp(rng.uniform(std::log(1e-8), std::log(1e5)));
    return x;
}

class Kernels : public testing::TestWithParam<Isa> {
protected:
    const KernelTable& k() const { return simd::kernels_for(GetParam()); }
};

// Lengths exercise the vector body and every tail length.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 150, 1001};

}  // namespace

TEST(KernelDispatch, ScalarAlwaysAvailable) {
    EXPECT_TRUE(simd::isa_available(Isa::Scalar));
    const auto isas = simd::available_isas();
    ASSERT_FALSE(isas.empty());
    EXPECT_EQ(isas.front(), Isa::Scalar);
    EXPECT_EQ(simd::kernels_for(Isa::Scalar).isa, Isa::Scalar);
}

TEST(KernelDispatch, DefaultIsWidestAvailable) {
    EXPECT_EQ(simd::kernels().isa, simd::available_isas().back());
}

TEST_P(Kernels, LogMatchesLibm) {
    RandomStream rng(1, 0);
    for (std::size_t n : kLengths) {
        auto x = log_inputs(rng, n);
        if (n > 3) {
            x[0] = 1.0;
            x[1] = std::nextafter(1.0, 2.0);
            x[2] = std::nextafter(1.0, 0.0);
            x[3] = 0.7071067811865476;
        }
        std::vector<double> out(n);
        k().log(x.data(), n, out.data());
        for (std::size_t i = 0; i < n; ++i) {
            const double ref = static_cast<double>(std::log(static_cast<long double>(x[i])));
            EXPECT_LE(std::abs(out[i] - ref), 4e-16 * std::abs(ref) + 1e-300) << "x=" << x[i];
        }
    }
}

TEST_P(Kernels, LogOfExtremeInputs) {
    const double d_min = std::numeric_limits<double>::min();
    std::vector<double> x{d_min, d_min / 4, 1e-300, 1e300, std::numeric_limits<double>::max(), 5e-324};
    std::vector<double> out(x.size());
    k().log(x.data(), x.size(), out.data());
    for (std::size_t i = 0; i < x.size(); ++i)
        EXPECT_NEAR(out[i], std::log(x[i]), 1e-15 * std::abs(std::log(x[i]))) << "x=" << x[i];
}

TEST_P(Kernels, PowerLogPeriodicMatchesLongDouble) {
    RandomStream rng(2, 0);
    for (std::size_t n : kLengths) {
        const auto dt = log_inputs(rng, n);
        std::vector<double> L(n);
        for (std::size_t i = 0; i < n; ++i) L[i] = std::log(dt[i]);
        for (int rep = 0; rep < 10; ++rep) {
            const double m = rng.uniform(-1.0, 2.0), w = rng.uniform(0.0, 25.0);
            const double phi = rng.uniform(0.0, 6.283185307179586);
            std::vector<double> f(n), g(n), h(n), f2(n), g2(n);
            k().power_log_periodic(L.data(), n, m, w, f.data(), g.data(), h.data());
            k().power_log_periodic_phase(L.data(), n, m, w, phi, f2.data(), g2.data());
            for (std::size_t i = 0; i < n; ++i) {
                // the kernels receive the double products m L and w L; the
                // phase argument may be formed with one rounding or two
                const double expo = m * L[i];
                const double arg = w * L[i];
                const long double fr = std::exp(static_cast<long double>(expo));
                const long double gr = fr * std::cos(static_cast<long double>(arg));
                const long double hr = fr * std::sin(static_cast<long double>(arg));
                const long double pr = fr * std::cos(static_cast<long double>(w) * L[i] - phi);
                const double tol = (4e-15 + 4e-16 * std::abs(arg)) * static_cast<double>(fr);
                EXPECT_NEAR(f[i], static_cast<double>(fr), tol);
                EXPECT_NEAR(g[i], static_cast<double>(gr), tol);
                EXPECT_NEAR(h[i], static_cast<double>(hr), tol);
                EXPECT_NEAR(f2[i], static_cast<double>(fr), tol);
                EXPECT_NEAR(g2[i], static_cast<double>(pr), tol);
            }
        }
    }
}

TEST_P(Kernels, PowerLogPeriodicOutOfRangeArguments) {
    // huge exponents and trigonometric arguments take the reference path
    std::vector<double> L{-18.0, -1.0, 0.0, 1.0, 11.0, 700.0, -700.0, 3.0};
    const std::size_t n = L.size();
    std::vector<double> f(n), g(n), h(n);
    for (auto [m, w] : {std::pair{1.5, 2e6}, std::pair{2.0, 8.0}, std::pair{0.5, 1e5}}) {
        k().power_log_periodic(L.data(), n, m, w, f.data(), g.data(), h.data());
        for (std::size_t i = 0; i < n; ++i) {
            const double fr = std::exp(m * L[i]);
            if (std::isinf(fr)) {
                EXPECT_TRUE(std::isinf(f[i]));
                continue;
            }
            EXPECT_NEAR(f[i], fr, 1e-14 * fr);
            EXPECT_NEAR(g[i], fr * std::cos(w * L[i]), 1e-9 * fr);
            EXPECT_NEAR(h[i], fr * std::sin(w * L[i]), 1e-9 * fr);
        }
    }
}

TEST_P(Kernels, ReductionsAndUpdates) {
    RandomStream rng(3, 0);
    for (std::size_t n : kLengths) {
        std::vector<double> a(n), b(n), y(n), f(n), g(n), h(n);
        long double dot_ref = 0, sum_ref = 0, abs_dot = 0, abs_sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.uniform(-10.0, 10.0);
            b[i] = rng.uniform(-10.0, 10.0);
            y[i] = rng.uniform(-1.0, 1.0);
            f[i] = rng.uniform(0.0, 5.0);
            g[i] = rng.uniform(-5.0, 5.0);
            h[i] = rng.uniform(-5.0, 5.0);
            dot_ref += static_cast<long double>(a[i]) * b[i];
            abs_dot += std::abs(static_cast<long double>(a[i]) * b[i]);
            sum_ref += a[i];
            abs_sum += std::abs(a[i]);
        }
        const double eps = std::numeric_limits<double>::epsilon();
        EXPECT_NEAR(k().dot(a.data(), b.data(), n), static_cast<double>(dot_ref),
                    4 * eps * static_cast<double>(abs_dot) + 1e-300);
        EXPECT_NEAR(k().sum(a.data(), n), static_cast<double>(sum_ref),
                    4 * eps * static_cast<double>(abs_sum) + 1e-300);

        auto y2 = y;
        k().axpy(0.75, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y2[i], y[i] + 0.75 * a[i], 1e-14 * (1 + std::abs(a[i])));
        auto a2 = a;
        k().scale(-3.0, a2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(a2[i], -3.0 * a[i]);

        const double c0 = 0.3, c1 = -0.2, c2 = 0.05, c3 = -0.07;
        long double rss = 0, rss3 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const long double r = y[i] - c0 - c1 * static_cast<long double>(f[i]) - c2 * static_cast<long double>(g[i]);
            rss3 += r * r;
            const long double r4 = r - c3 * static_cast<long double>(h[i]);
            rss += r4 * r4;
        }
        EXPECT_NEAR(k().residual_ss(y.data(), f.data(), g.data(), h.data(), n, c0, c1, c2, c3),
                    static_cast<double>(rss), 1e-13 * static_cast<double>(rss) + 1e-300);
        EXPECT_NEAR(k().residual_ss(y.data(), f.data(), g.data(), nullptr, n, c0, c1, c2, c3),
                    static_cast<double>(rss3), 1e-13 * static_cast<double>(rss3) + 1e-300);
    }
}

INSTANTIATE_TEST_SUITE_P(AllIsas, Kernels, testing::ValuesIn(simd::available_isas()), isa_label);

TEST(KernelEquivalence, WideVariantsAgreeWithScalarReference) {
    const auto& ref = simd::kernels_for(Isa::Scalar);
    RandomStream rng(9, 0);
    for (Isa isa : simd::available_isas()) {
        if (isa == Isa::Scalar) continue;
        const auto& wide = simd::kernels_for(isa);
        for (int rep = 0; rep < 200; ++rep) {
            const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0.0, 300.0));
            const auto dt = log_inputs(rng, n);
            std::vector<double> L1(n), L2(n);
            ref.log(dt.data(), n, L1.data());
            wide.log(dt.data(), n, L2.data());
            for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(L1[i], L2[i], 4e-16 * std::abs(L1[i]) + 1e-300);

            const double m = rng.uniform(0.1, 0.9), w = rng.uniform(6.0, 13.0);
            std::vector<double> f1(n), g1(n), h1(n), f2(n), g2(n), h2(n);
            ref.power_log_periodic(L1.data(), n, m, w, f1.data(), g1.data(), h1.data());
            wide.power_log_periodic(L1.data(), n, m, w, f2.data(), g2.data(), h2.data());
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_LE(std::abs(f1[i] - f2[i]), 4e-15 * f1[i]);
                EXPECT_LE(std::abs(g1[i] - g2[i]), 4e-15 * f1[i]);
                EXPECT_LE(std::abs(h1[i] - h2[i]), 4e-15 * f1[i]);
            }
            const double d1 = ref.dot(f1.data(), g1.data(), n), d2 = wide.dot(f1.data(), g1.data(), n);
            EXPECT_NEAR(d1, d2, 1e-13 * ref.dot(f1.data(), f1.data(), n));
        }
    }
}
