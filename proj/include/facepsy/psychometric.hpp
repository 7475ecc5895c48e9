#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace facepsy::psychometric {

/// Base sigmoid f(x; alpha, beta), each normalized so that f(alpha) = 0.5.
///   Logistic:           1 / (1 + exp(-beta (x - alpha)))
///   CumulativeGaussian: Phi(beta (x - alpha))
///   Weibull:            1 - exp(-ln2 (x / alpha)^beta), x > 0, alpha > 0
enum class BaseFunction { Logistic, CumulativeGaussian, Weibull };

struct Params {
    double alpha = 0.5;   // location, in stimulus units
    double beta = 10.0;   // slope, > 0
    double gamma = 0.5;   // guess rate
    double lambda = 0.0;  // lapse rate
    BaseFunction base = BaseFunction::Logistic;

    /// Throws ValidationError if beta <= 0, gamma or lambda outside [0, 1) or gamma + lambda >= 1.
    void validate() const;
};

struct IntensityBin {
    double x = 0.0;
    std::int64_t n_trials = 0;
    std::int64_t n_correct = 0;

    friend bool operator==(const IntensityBin&, const IntensityBin&) = default;
};

struct FitOptions {
    BaseFunction base = BaseFunction::Logistic;
    std::optional<double> fixed_gamma;  // 0.5 for 2AFC; free when absent
    double max_lambda = 0.1;
};

struct FitResult {
    Params params;
    double log_likelihood = 0.0;
};

double base_value(BaseFunction base, double x, double alpha, double beta);

/// gamma + (1 - gamma - lambda) f(x; alpha, beta)
double evaluate_psi(const Params& params, double x);

/// Binomial log-likelihood sum k log Psi + (n - k) log(1 - Psi), without the
/// binomial coefficient.
double log_likelihood(const Params& params, std::span<const IntensityBin> bins);

/// Deterministic maximum-likelihood fit: a fixed multi-start grid followed by
/// coordinate-wise pattern search. Throws ValidationError on malformed bins and
/// UnidentifiableError when the proportions carry no slope information.
FitResult fit_mle(std::span<const IntensityBin> bins, const FitOptions& options);

/// Intensity at which Psi equals level. Throws DomainError unless
/// gamma < level < 1 - lambda.
double threshold_at(const Params& params, double level);

std::string to_string(BaseFunction base);
BaseFunction base_from_string(const std::string& name);

/// CSV with header "x,n_trials,n_correct".
std::vector<IntensityBin> read_bins_csv(std::istream& in, const std::string& source = "bins");
void write_bins_csv(std::ostream& out, std::span<const IntensityBin> bins);

}  // namespace facepsy::psychometric
