#pragma once

// Signal detection measures for Yes/No, spatial 2AFC and ABX procedures.
//
// Stimulus-response tables follow one layout for every procedure: row 0 is the
// signal alternative, row 1 the noise alternative, column 0 the "signal"
// response. For 2AFC the rows are the sequences <s,n> and <n,s> and column 0
// is the response "s = A"; for ABX the rows are X=s and X=n and column 0 is the
// response "X is manipulated".

#include <array>
#include <cstdint>
#include <optional>

namespace facepsy::sdt {

enum class Procedure { YesNo, TwoAFC, ABX };

enum class Correction { None, LogLinear };

struct StimulusResponseTable {
    Procedure procedure = Procedure::TwoAFC;
    // counts[row][column]
    std::array<std::array<std::int64_t, 2>, 2> counts{};

    std::int64_t n11() const { return counts[0][0]; }
    std::int64_t n12() const { return counts[0][1]; }
    std::int64_t n21() const { return counts[1][0]; }
    std::int64_t n22() const { return counts[1][1]; }
    std::int64_t signal_trials() const { return counts[0][0] + counts[0][1]; }
    std::int64_t noise_trials() const { return counts[1][0] + counts[1][1]; }
    std::int64_t total() const { return signal_trials() + noise_trials(); }
    std::int64_t correct() const { return counts[0][0] + counts[1][1]; }

    static StimulusResponseTable make(Procedure p, std::int64_t n11, std::int64_t n12,
                                      std::int64_t n21, std::int64_t n22);
};

struct RatePair {
    double hit = 0.5;
    double false_alarm = 0.5;
    bool corrected = false;
};

struct SdtEstimate {
    double d_prime = 0.0;
    std::optional<double> criterion;  // absent for 2AFC
    std::optional<double> pc_max;     // ABX only
};

struct PerformanceSummary {
    double acc = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    double tnr = 0.0;

    // Presentation-attack-detection aliases: attacks accepted as bona fide,
    // bona fide rejected as attacks.
    double apcer() const { return fnr; }
    double bpcer() const { return fpr; }
};

/// Standard normal CDF. Saturates to exactly 0 or 1 far in the tails.
double normal_cdf(double x) noexcept;

/// Standard normal quantile z(p). Throws DomainError unless 0 < p < 1.
double inverse_normal_cdf(double p);

/// Hit and false-alarm rates of a table. LogLinear adds 0.5 to every cell.
/// Throws ValidationError for negative counts or an empty row.
RatePair rates_from_table(const StimulusResponseTable& table, Correction correction);

/// d' = (z(H) - z(F)) / sqrt(2) for the spatial 2AFC design.
SdtEstimate dprime_2afc(const RatePair& rates);

/// d' = z(H) - z(F) with criterion c for single-interval Yes/No designs.
SdtEstimate dprime_yesno(const RatePair& rates);

/// Proportion correct of an unbiased observer, Phi((z(H) - z(F)) / 2).
double pc_max_unbiased(const RatePair& rates);

/// ABX proportion correct under the differencing decision rule.
double pc_abx_given_dprime(double d_prime);

/// Inverts pc_abx_given_dprime at P(C)max by bisection on [0, 20] until the d'
/// bracket is narrower than tol (which also bounds the residual in P(C)).
/// Observed P(C)max below one half yields the negated solution for 1 - P(C)max.
SdtEstimate dprime_abx_differencing(const RatePair& rates, double tol = 1e-9);

/// c = -(z(H) + z(F)) / 2; exactly 0 when H + F == 1.
double criterion_c(const RatePair& rates);

/// Manipulated images are the positive class. Throws ValidationError on an
/// empty class or negative counts.
PerformanceSummary performance_measures(std::int64_t tp, std::int64_t fn, std::int64_t fp,
                                        std::int64_t tn);

}  // namespace facepsy::sdt
