#include "facepsy/sdt.hpp"

#include <array>
#include <cassert>
#include <cmath>
#include <numbers>

#include "facepsy/error.hpp"

namespace facepsy::sdt {

namespace {

template <std::size_t N>
double horner(double x, const std::array<double, N>& coeffs) {
    double result = 0.0;
    for (double c : coeffs) result = result * x + c;
    return result;
}

// Acklam's rational approximation, relative error about 1.15e-9.
constexpr std::array<double, 6> kA = {-3.969683028665376e+01, 2.209460984245205e+02,
                                      -2.759285104469687e+02, 1.383577518672690e+02,
                                      -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 6> kB = {-5.447609879822406e+01, 1.615858368580409e+02,
                                      -1.556989798598866e+02, 6.680131188771972e+01,
                                      -1.328068155288572e+01, 1.0};
constexpr std::array<double, 6> kC = {-7.784894002430293e-03, -3.223964580411365e-01,
                                      -2.400758277161838e+00, -2.549732539343734e+00,
                                      4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 5> kD = {7.784695709041462e-03, 3.224671290700398e-01,
                                      2.445134137142996e+00, 3.754408661907416e+00, 1.0};
constexpr double kLowTail = 0.02425;

// Lower half only, p <= 0.5.
double acklam_lower(double p) {
    if (p < kLowTail) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return horner(q, kC) / horner(q, kD);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return q * horner(r, kA) / horner(r, kB);
}

// One Halley refinement against the forward CDF brings the error to ~1e-15.
double lower_quantile(double p) {
    double z = acklam_lower(p);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    if (pdf > 0.0) {
        const double u = (normal_cdf(z) - p) / pdf;
        z -= u / (1.0 + 0.5 * z * u);
    }
    return z;
}

void require_open_unit(const RatePair& rates) {
    auto inside = [](double v) { return v > 0.0 && v < 1.0; };
    if (!inside(rates.hit) || !inside(rates.false_alarm)) {
        throw DomainError("hit and false-alarm rates must lie strictly inside (0, 1); "
                          "apply a correction for extreme proportions");
    }
}

}  // namespace

StimulusResponseTable StimulusResponseTable::make(Procedure p, std::int64_t n11, std::int64_t n12,
                                                  std::int64_t n21, std::int64_t n22) {
    StimulusResponseTable t;
    t.procedure = p;
    t.counts = {{{n11, n12}, {n21, n22}}};
    return t;
}

double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("inverse_normal_cdf: probability must lie in (0, 1)");
    }
    // 1 - p is exact for p >= 0.5, so z(1 - p) = -z(p) holds bit for bit.
    return p > 0.5 ? -lower_quantile(1.0 - p) : lower_quantile(p);
}

RatePair rates_from_table(const StimulusResponseTable& table, Correction correction) {
    for (const auto& row : table.counts) {
        for (auto c : row) {
            if (c < 0) throw ValidationError("stimulus-response table has a negative count");
        }
    }
    if (table.signal_trials() == 0 || table.noise_trials() == 0) {
        throw ValidationError("stimulus-response table has an empty row");
    }
    const double add = correction == Correction::LogLinear ? 0.5 : 0.0;
    RatePair r;
    r.hit = (static_cast<double>(table.n11()) + add) /
            (static_cast<double>(table.signal_trials()) + 2.0 * add);
    r.false_alarm = (static_cast<double>(table.n21()) + add) /
                    (static_cast<double>(table.noise_trials()) + 2.0 * add);
    r.corrected = correction != Correction::None;
    return r;
}

SdtEstimate dprime_2afc(const RatePair& rates) {
    require_open_unit(rates);
    SdtEstimate e;
    e.d_prime = (inverse_normal_cdf(rates.hit) - inverse_normal_cdf(rates.false_alarm)) /
                std::numbers::sqrt2;
    return e;
}

SdtEstimate dprime_yesno(const RatePair& rates) {
    require_open_unit(rates);
    SdtEstimate e;
    e.d_prime = inverse_normal_cdf(rates.hit) - inverse_normal_cdf(rates.false_alarm);
    e.criterion = criterion_c(rates);
    return e;
}

double pc_max_unbiased(const RatePair& rates) {
    require_open_unit(rates);
    return normal_cdf((inverse_normal_cdf(rates.hit) - inverse_normal_cdf(rates.false_alarm)) / 2.0);
}

double pc_abx_given_dprime(double d_prime) {
    if (!(d_prime >= 0.0)) throw DomainError("pc_abx_given_dprime: d' must be non-negative");
    const double a = d_prime / std::numbers::sqrt2;
    const double b = d_prime / std::sqrt(6.0);
    return normal_cdf(a) * normal_cdf(b) + normal_cdf(-a) * normal_cdf(-b);
}

SdtEstimate dprime_abx_differencing(const RatePair& rates, double tol) {
    if (!(tol > 0.0)) throw DomainError("dprime_abx_differencing: tolerance must be positive");
    const double pc = pc_max_unbiased(rates);
    const bool below_chance = pc < 0.5;
    const double target = below_chance ? 1.0 - pc : pc;

    double lo = 0.0;
    double hi = 20.0;
    double d = 0.0;
    if (target >= pc_abx_given_dprime(hi)) {
        d = hi;
    } else if (target > 0.5) {
        assert(pc_abx_given_dprime(lo) <= target);
        // The bracket is narrowed in d' rather than stopped on |dp|: the curve is
        // flat near zero, where a small dp still leaves d' far off. The slope is
        // below 1, so the |dp| bound follows.
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (pc_abx_given_dprime(mid) < target ? lo : hi) = mid;
        }
        d = 0.5 * (lo + hi);
    }
    SdtEstimate e;
    e.d_prime = below_chance ? -d : d;
    e.criterion = criterion_c(rates);
    e.pc_max = pc;
    return e;
}

double criterion_c(const RatePair& rates) {
    require_open_unit(rates);
    // Rates summing to one in double arithmetic count as symmetric, e.g. 0.84 and 0.16.
    if (rates.hit + rates.false_alarm == 1.0) return 0.0;
    return -(inverse_normal_cdf(rates.hit) + inverse_normal_cdf(rates.false_alarm)) / 2.0;
}

PerformanceSummary performance_measures(std::int64_t tp, std::int64_t fn, std::int64_t fp,
                                        std::int64_t tn) {
    if (tp < 0 || fn < 0 || fp < 0 || tn < 0) {
        throw ValidationError("performance_measures: counts must be non-negative");
    }
    if (tp + fn == 0) throw ValidationError("performance_measures: no positive (manipulated) samples");
    if (fp + tn == 0) throw ValidationError("performance_measures: no negative (bona fide) samples");
    PerformanceSummary s;
    const auto pos = static_cast<double>(tp + fn);
    const auto neg = static_cast<double>(fp + tn);
    s.acc = static_cast<double>(tp + tn) / (pos + neg);
    s.tpr = static_cast<double>(tp) / pos;
    s.fpr = static_cast<double>(fp) / neg;
    s.fnr = 1.0 - s.tpr;
    s.tnr = 1.0 - s.fpr;
    return s;
}

}  // namespace facepsy::sdt
