// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached through the
// dispatcher after a cpuid check.

#include "lppl/simd.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

namespace lppl::simd {
namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// ---------------------------------------------------------------------------
// exp: x = k ln2 + r, |r| <= ln2/2, degree-13 Taylor polynomial on r.

constexpr double kLn2 = 0.6931471805599453;
constexpr double kLn2Lo = 2.3190468138462996e-17;
constexpr double kLog2e = 1.4426950408889634;
constexpr double kExpLimit = 700.0;

inline __m256d exp_kernel(__m256d x) {
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2e)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2), x);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Lo), r);

    __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    // 2^k assembled from the exponent field; |k| <= 1010 keeps it normal.
    const __m256d magic = _mm256_set1_pd(4503599627370496.0);  // 2^52
    const __m256d biased = _mm256_add_pd(_mm256_add_pd(k, _mm256_set1_pd(1023.0)), magic);
    const __m256i bits = _mm256_slli_epi64(
        _mm256_sub_epi64(_mm256_castpd_si256(biased), _mm256_castpd_si256(magic)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

inline bool exp_in_range(__m256d x) {
    const __m256d ax = _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
    // NaN compares false and lands on the scalar path.
    const __m256d ok = _mm256_cmp_pd(ax, _mm256_set1_pd(kExpLimit), _CMP_LE_OQ);
    return _mm256_movemask_pd(ok) == 0xF;
}

// ---------------------------------------------------------------------------
// log: x = 2^e * mant with mant in [sqrt(1/2), sqrt(2)),
// ln(mant) = 2 atanh(s), s = (mant - 1) / (mant + 1).

inline __m256d log_kernel(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
    __m256d mant = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

    // exponent as double via the 2^52 trick on the shifted biased exponent
    const __m256i biased_exp = _mm256_srli_epi64(bits, 52);
    const __m256d magic = _mm256_set1_pd(4503599627370496.0);
    __m256d e = _mm256_sub_pd(
        _mm256_castsi256_pd(_mm256_or_si256(biased_exp, _mm256_castpd_si256(magic))), magic);
    e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

    const __m256d big = _mm256_cmp_pd(mant, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
    mant = _mm256_blendv_pd(mant, _mm256_mul_pd(mant, _mm256_set1_pd(0.5)), big);
    e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d s = _mm256_div_pd(_mm256_sub_pd(mant, one), _mm256_add_pd(mant, one));
    const __m256d s2 = _mm256_mul_pd(s, s);

    __m256d p = _mm256_set1_pd(1.0 / 23.0);
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 21.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 19.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 17.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 15.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 13.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 11.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 9.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 7.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 5.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 3.0));
    // ln(mant) = 2s + 2s^3 p
    const __m256d two_s = _mm256_add_pd(s, s);
    const __m256d log_mant = _mm256_fmadd_pd(_mm256_mul_pd(two_s, s2), p, two_s);

    const __m256d low = _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Lo), log_mant);
    return _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2), low);
}

inline bool log_in_range(__m256d x) {
    const __m256d lo = _mm256_cmp_pd(x, _mm256_set1_pd(std::numeric_limits<double>::min()),
                                     _CMP_GE_OQ);
    const __m256d hi = _mm256_cmp_pd(x, _mm256_set1_pd(std::numeric_limits<double>::max()),
                                     _CMP_LE_OQ);
    return _mm256_movemask_pd(_mm256_and_pd(lo, hi)) == 0xF;
}

// ---------------------------------------------------------------------------
// sincos: x = k pi/2 + r with a three-part Cody-Waite split, |r| <= pi/4.

constexpr double kPio2A = 1.5707963267948966;
constexpr double kPio2B = 6.123233995736766e-17;
constexpr double kPio2C = -1.4973849048591698e-33;
constexpr double kTwoOverPi = 0.6366197723675814;
constexpr double kTrigLimit = 1e6;

inline void sincos_kernel(__m256d x, __m256d& sin_out, __m256d& cos_out) {
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kPio2A), x);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kPio2B), r);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kPio2C), r);
    const __m256d r2 = _mm256_mul_pd(r, r);

    // sin r = r + r^3 * ps(r^2), Taylor through r^17
    __m256d ps = _mm256_set1_pd(1.0 / 355687428096000.0);       // 1/17!
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(-1.0 / 1307674368000.0));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(1.0 / 6227020800.0));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(-1.0 / 39916800.0));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(1.0 / 362880.0));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(-1.0 / 5040.0));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(1.0 / 120.0));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(-1.0 / 6.0));
    const __m256d s = _mm256_fmadd_pd(_mm256_mul_pd(r, r2), ps, r);

    // cos r = 1 - r^2/2 + r^4 * pc(r^2), Taylor through r^18
    __m256d pc = _mm256_set1_pd(-1.0 / 6402373705728000.0);     // -1/18!
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(1.0 / 20922789888000.0));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(-1.0 / 87178291200.0));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(1.0 / 479001600.0));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(-1.0 / 3628800.0));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(1.0 / 40320.0));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(-1.0 / 720.0));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(1.0 / 24.0));
    const __m256d half_r2 = _mm256_mul_pd(r2, _mm256_set1_pd(0.5));
    const __m256d c = _mm256_add_pd(_mm256_sub_pd(_mm256_set1_pd(1.0), half_r2),
                                    _mm256_mul_pd(_mm256_mul_pd(r2, r2), pc));

    // quadrant from the low mantissa bits of k + 1.5 * 2^52
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);
    const __m256i q = _mm256_castpd_si256(_mm256_add_pd(k, magic));
    const __m256i three = _mm256_set1_epi64x(3);
    const __m256i quadrant = _mm256_and_si256(q, three);
    const __m256i odd = _mm256_cmpeq_epi64(_mm256_and_si256(quadrant, _mm256_set1_epi64x(1)),
                                           _mm256_set1_epi64x(1));
    const __m256d swap = _mm256_castsi256_pd(odd);
    const __m256d sin_base = _mm256_blendv_pd(s, c, swap);
    const __m256d cos_base = _mm256_blendv_pd(c, s, swap);

    const __m256i two = _mm256_set1_epi64x(2);
    const __m256i sin_sign = _mm256_slli_epi64(_mm256_and_si256(quadrant, two), 62);
    const __m256i cos_sign = _mm256_slli_epi64(
        _mm256_and_si256(_mm256_add_epi64(quadrant, _mm256_set1_epi64x(1)), two), 62);
    sin_out = _mm256_xor_pd(sin_base, _mm256_castsi256_pd(sin_sign));
    cos_out = _mm256_xor_pd(cos_base, _mm256_castsi256_pd(cos_sign));
}

inline bool trig_in_range(__m256d x) {
    const __m256d ax = _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
    const __m256d ok = _mm256_cmp_pd(ax, _mm256_set1_pd(kTrigLimit), _CMP_LE_OQ);
    return _mm256_movemask_pd(ok) == 0xF;
}

// ---------------------------------------------------------------------------

void log_avx2(const double* x, std::size_t n, double* out) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d v = _mm256_loadu_pd(x + i);
        if (log_in_range(v)) {
            _mm256_storeu_pd(out + i, log_kernel(v));
        } else {
            for (std::size_t j = 0; j < kLanes; ++j) out[i + j] = std::log(x[i + j]);
        }
    }
    for (; i < n; ++i) out[i] = std::log(x[i]);
}

void power_log_periodic_avx2(const double* log_dt, std::size_t n, double m, double omega,
                             double* f, double* g, double* h) {
    const __m256d vm = _mm256_set1_pd(m);
    const __m256d vw = _mm256_set1_pd(omega);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d L = _mm256_loadu_pd(log_dt + i);
        const __m256d expo = _mm256_mul_pd(vm, L);
        const __m256d arg = _mm256_mul_pd(vw, L);
        if (exp_in_range(expo) && trig_in_range(arg)) {
            const __m256d power = exp_kernel(expo);
            __m256d s, c;
            sincos_kernel(arg, s, c);
            _mm256_storeu_pd(f + i, power);
            _mm256_storeu_pd(g + i, _mm256_mul_pd(power, c));
            _mm256_storeu_pd(h + i, _mm256_mul_pd(power, s));
        } else {
            for (std::size_t j = i; j < i + kLanes; ++j) {
                const double power = std::exp(m * log_dt[j]);
                f[j] = power;
                g[j] = power * std::cos(omega * log_dt[j]);
                h[j] = power * std::sin(omega * log_dt[j]);
            }
        }
    }
    for (; i < n; ++i) {
        const double power = std::exp(m * log_dt[i]);
        f[i] = power;
        g[i] = power * std::cos(omega * log_dt[i]);
        h[i] = power * std::sin(omega * log_dt[i]);
    }
}

void power_log_periodic_phase_avx2(const double* log_dt, std::size_t n, double m, double omega,
                                   double phi, double* f, double* g) {
    const __m256d vm = _mm256_set1_pd(m);
    const __m256d vw = _mm256_set1_pd(omega);
    const __m256d vphi = _mm256_set1_pd(phi);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d L = _mm256_loadu_pd(log_dt + i);
        const __m256d expo = _mm256_mul_pd(vm, L);
        const __m256d arg = _mm256_fmsub_pd(vw, L, vphi);
        if (exp_in_range(expo) && trig_in_range(arg)) {
            const __m256d power = exp_kernel(expo);
            __m256d s, c;
            sincos_kernel(arg, s, c);
            _mm256_storeu_pd(f + i, power);
            _mm256_storeu_pd(g + i, _mm256_mul_pd(power, c));
        } else {
            for (std::size_t j = i; j < i + kLanes; ++j) {
                const double power = std::exp(m * log_dt[j]);
                f[j] = power;
                g[j] = power * std::cos(omega * log_dt[j] - phi);
            }
        }
    }
    for (; i < n; ++i) {
        const double power = std::exp(m * log_dt[i]);
        f[i] = power;
        g[i] = power * std::cos(omega * log_dt[i] - phi);
    }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + kLanes), _mm256_loadu_pd(b + i + kLanes),
                               acc1);
    }
    for (; i + kLanes <= n; i += kLanes)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double total = hsum(acc);
    for (; i < n; ++i) total += a[i];
    return total;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

double residual_ss_avx2(const double* y, const double* f, const double* g, const double* h,
                        std::size_t n, double c0, double c1, double c2, double c3) {
    const __m256d v0 = _mm256_set1_pd(c0);
    const __m256d v1 = _mm256_set1_pd(c1);
    const __m256d v2 = _mm256_set1_pd(c2);
    const __m256d v3 = _mm256_set1_pd(c3);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        __m256d r = _mm256_sub_pd(_mm256_loadu_pd(y + i), v0);
        r = _mm256_fnmadd_pd(v1, _mm256_loadu_pd(f + i), r);
        r = _mm256_fnmadd_pd(v2, _mm256_loadu_pd(g + i), r);
        if (h != nullptr) r = _mm256_fnmadd_pd(v3, _mm256_loadu_pd(h + i), r);
        acc = _mm256_fmadd_pd(r, r, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        double r = y[i] - c0 - c1 * f[i] - c2 * g[i];
        if (h != nullptr) r -= c3 * h[i];
        total += r * r;
    }
    return total;
}

constexpr KernelTable kAvx2Table{
    Isa::Avx2,
    "avx2",
    log_avx2,
    power_log_periodic_avx2,
    power_log_periodic_phase_avx2,
    dot_avx2,
    sum_avx2,
    axpy_avx2,
    scale_avx2,
    residual_ss_avx2,
};

}  // namespace

const KernelTable& detail::avx2_table() { return kAvx2Table; }

}  // namespace lppl::simd
