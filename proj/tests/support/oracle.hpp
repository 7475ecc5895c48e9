#pragma once

// Reference implementations used only to check the library. They trade speed
// for transparency: a long double Taylor series for Phi and plain bisection
// for everything that needs an inverse.

#include <cmath>
#include <functional>

namespace oracle {

/// Phi(x) = 1/2 + phi(x) * sum_n x^(2n+1) / (1*3*...*(2n+1)), summed until
/// terms vanish. Exact to long double rounding for |x| <= 10.
inline long double phi(long double x) {
    if (x < 0) return 1.0L - phi(-x);
    const long double pdf = std::exp(-x * x / 2.0L) / std::sqrt(2.0L * 3.14159265358979323846264338327950288L);
    long double term = x, sum = x;
    for (int n = 1; n < 2000; ++n) {
        term *= x * x / (2.0L * n + 1.0L);
        sum += term;
        if (term < sum * 1e-22L) break;
    }
    return 0.5L + pdf * sum;
}

/// Root of an increasing function on [lo, hi].
inline long double bisect(const std::function<long double(long double)>& f, long double target, long double lo,
                          long double hi) {
    for (int i = 0; i < 200; ++i) {
        const long double mid = (lo + hi) / 2.0L;
        if (f(mid) < target) lo = mid; else hi = mid;
    }
    return (lo + hi) / 2.0L;
}

inline long double z(long double p) { return bisect(phi, p, -12.0L, 12.0L); }

inline long double pc_abx(long double d) {
    const long double r2 = std::sqrt(2.0L), r6 = std::sqrt(6.0L);
    return phi(d / r2) * phi(d / r6) + phi(-d / r2) * phi(-d / r6);
}

inline long double dprime_abx_from_pc(long double pc) { return bisect(pc_abx, pc, 0.0L, 20.0L); }

}  // namespace oracle
