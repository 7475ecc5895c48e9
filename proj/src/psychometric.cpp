#include "facepsy/psychometric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include "facepsy/csv.hpp"
#include "facepsy/error.hpp"
#include "facepsy/sdt.hpp"

namespace facepsy::psychometric {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void validate_bins(std::span<const IntensityBin> bins) {
    std::vector<std::string> problems;
    if (bins.size() < 3) problems.emplace_back("at least 3 intensity bins are required");
    std::int64_t total = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const auto& b = bins[i];
        if (!std::isfinite(b.x)) problems.push_back("bin " + std::to_string(i) + ": intensity is not finite");
        if (b.n_trials < 0 || b.n_correct < 0 || b.n_correct > b.n_trials) {
            problems.push_back("bin " + std::to_string(i) + ": require 0 <= n_correct <= n_trials");
        }
        if (i > 0 && !(b.x > bins[i - 1].x)) {
            problems.push_back("bin " + std::to_string(i) + ": intensities must be strictly increasing");
        }
        total += b.n_trials;
    }
    if (total < 20) problems.emplace_back("at least 20 trials in total are required");
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

bool proportions_flat(std::span<const IntensityBin> bins) {
    std::optional<double> first;
    for (const auto& b : bins) {
        if (b.n_trials == 0) continue;
        const double p = static_cast<double>(b.n_correct) / static_cast<double>(b.n_trials);
        if (!first) {
            first = p;
        } else if (std::abs(p - *first) > 1e-12) {
            return false;
        }
    }
    return true;
}

// Search space: alpha, log(beta), lambda, gamma.
struct Bounds {
    std::array<double, 4> lo;
    std::array<double, 4> hi;
};

Params to_params(const std::array<double, 4>& v, BaseFunction base) {
    return Params{v[0], std::exp(v[1]), v[3], v[2], base};
}

}  // namespace

void Params::validate() const {
    std::vector<std::string> problems;
    if (!(beta > 0.0) || !std::isfinite(beta)) problems.emplace_back("beta must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) problems.emplace_back("gamma must lie in [0, 1)");
    if (!(lambda >= 0.0 && lambda < 1.0)) problems.emplace_back("lambda must lie in [0, 1)");
    if (!(gamma + lambda < 1.0)) problems.emplace_back("gamma + lambda must be below 1");
    if (!std::isfinite(alpha)) problems.emplace_back("alpha must be finite");
    if (base == BaseFunction::Weibull && !(alpha > 0.0)) problems.emplace_back("Weibull alpha must be positive");
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

double base_value(BaseFunction base, double x, double alpha, double beta) {
    switch (base) {
        case BaseFunction::Logistic:
            return 1.0 / (1.0 + std::exp(-beta * (x - alpha)));
        case BaseFunction::CumulativeGaussian:
            return sdt::normal_cdf(beta * (x - alpha));
        case BaseFunction::Weibull:
            if (x <= 0.0) return 0.0;
            return -std::expm1(-kLn2 * std::pow(x / alpha, beta));
    }
    return 0.0;
}

double evaluate_psi(const Params& p, double x) {
    return p.gamma + (1.0 - p.gamma - p.lambda) * base_value(p.base, x, p.alpha, p.beta);
}

double log_likelihood(const Params& params, std::span<const IntensityBin> bins) {
    constexpr double kTiny = 1e-300;
    double ll = 0.0;
    for (const auto& b : bins) {
        const double psi = evaluate_psi(params, b.x);
        const auto k = static_cast<double>(b.n_correct);
        const auto miss = static_cast<double>(b.n_trials - b.n_correct);
        if (k > 0) ll += k * std::log(std::max(psi, kTiny));
        if (miss > 0) ll += miss * std::log(std::max(1.0 - psi, kTiny));
    }
    return ll;
}

FitResult fit_mle(std::span<const IntensityBin> bins, const FitOptions& options) {
    validate_bins(bins);
    if (options.fixed_gamma && !(*options.fixed_gamma >= 0.0 && *options.fixed_gamma < 1.0)) {
        throw ValidationError("fixed guess rate must lie in [0, 1)");
    }
    if (!(options.max_lambda >= 0.0 && options.max_lambda < 1.0)) {
        throw ValidationError("lapse bound must lie in [0, 1)");
    }
    if (proportions_flat(bins)) {
        throw UnidentifiableError("psychometric parameters are unidentifiable: proportion correct is "
                                  "identical in every bin");
    }

    const double xmin = bins.front().x;
    const double xmax = bins.back().x;
    const double range = xmax - xmin;
    const bool weibull = options.base == BaseFunction::Weibull;
    if (weibull && !(xmax > 0.0)) throw ValidationError("Weibull fits need positive intensities");

    // Weibull beta is a shape exponent; the other bases use beta as an inverse scale.
    const double beta_lo = weibull ? 0.2 : 0.5 / range;
    const double beta_hi = weibull ? 50.0 : 500.0 / range;
    const double gamma_hi = 0.95 - options.max_lambda;

    Bounds bounds;
    bounds.lo = {weibull ? std::max(xmin, range * 1e-3) * 0.5 : xmin - range, std::log(beta_lo), 0.0,
                 options.fixed_gamma.value_or(0.0)};
    bounds.hi = {xmax + range, std::log(beta_hi), options.max_lambda,
                 options.fixed_gamma.value_or(gamma_hi)};

    auto objective = [&](const std::array<double, 4>& v) {
        return log_likelihood(to_params(v, options.base), bins);
    };

    // Multi-start grid.
    constexpr int kAlphaSteps = 21;
    constexpr int kBetaSteps = 15;
    const std::array<double, 4> lambda_grid = {0.0, 0.02, 0.05, 0.1};
    std::vector<double> gamma_grid;
    if (options.fixed_gamma) {
        gamma_grid.push_back(*options.fixed_gamma);
    } else {
        for (double g = 0.0; g <= std::min(0.5, gamma_hi) + 1e-12; g += 0.1) gamma_grid.push_back(g);
    }

    struct Start {
        std::array<double, 4> v;
        double ll;
    };
    std::vector<Start> starts;
    for (int i = 0; i < kAlphaSteps; ++i) {
        const double alpha = std::max(bounds.lo[0], xmin + range * i / (kAlphaSteps - 1));
        for (int j = 0; j < kBetaSteps; ++j) {
            const double lb = bounds.lo[1] + (bounds.hi[1] - bounds.lo[1]) * j / (kBetaSteps - 1);
            for (double lam : lambda_grid) {
                if (lam > options.max_lambda) continue;
                for (double g : gamma_grid) {
                    const std::array<double, 4> v{alpha, lb, lam, g};
                    starts.push_back({v, objective(v)});
                }
            }
        }
    }
    std::stable_sort(starts.begin(), starts.end(),
                     [](const Start& a, const Start& b) { return a.ll > b.ll; });
    starts.resize(std::min<std::size_t>(starts.size(), 4));

    // Coordinate-wise pattern search with step halving.
    Start best{starts.front().v, -std::numeric_limits<double>::infinity()};
    const std::array<double, 4> initial_steps = {std::max(range, 1e-3) / 10.0, 0.5, 0.02, 0.05};
    for (const auto& start : starts) {
        auto v = start.v;
        double ll = start.ll;
        auto steps = initial_steps;
        for (int iter = 0; iter < 100000; ++iter) {
            bool improved = false;
            for (std::size_t k = 0; k < 4; ++k) {
                if (bounds.hi[k] <= bounds.lo[k]) continue;
                for (double sign : {1.0, -1.0}) {
                    auto trial = v;
                    trial[k] = std::clamp(v[k] + sign * steps[k], bounds.lo[k], bounds.hi[k]);
                    if (trial[k] == v[k]) continue;
                    const double t = objective(trial);
                    if (t > ll) {
                        v = trial;
                        ll = t;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) {
                bool done = true;
                for (std::size_t k = 0; k < 4; ++k) {
                    steps[k] *= 0.5;
                    if (steps[k] > 1e-11 * std::max(1.0, std::abs(v[k]))) done = false;
                }
                if (done) break;
            }
        }
        if (ll > best.ll) best = {v, ll};
    }

    FitResult result;
    result.params = to_params(best.v, options.base);
    result.log_likelihood = best.ll;
    return result;
}

double threshold_at(const Params& params, double level) {
    params.validate();
    if (!(level > params.gamma && level < 1.0 - params.lambda)) {
        throw DomainError("threshold_at: level must lie strictly between gamma and 1 - lambda");
    }
    const double u = (level - params.gamma) / (1.0 - params.gamma - params.lambda);
    switch (params.base) {
        case BaseFunction::Logistic:
            return params.alpha + std::log(u / (1.0 - u)) / params.beta;
        case BaseFunction::CumulativeGaussian:
            return params.alpha + sdt::inverse_normal_cdf(u) / params.beta;
        case BaseFunction::Weibull:
            return params.alpha * std::pow(-std::log1p(-u) / kLn2, 1.0 / params.beta);
    }
    return params.alpha;
}

std::string to_string(BaseFunction base) {
    switch (base) {
        case BaseFunction::Logistic: return "logistic";
        case BaseFunction::CumulativeGaussian: return "gaussian";
        case BaseFunction::Weibull: return "weibull";
    }
    return "logistic";
}

BaseFunction base_from_string(const std::string& name) {
    if (name == "logistic") return BaseFunction::Logistic;
    if (name == "gaussian" || name == "cumulative_gaussian") return BaseFunction::CumulativeGaussian;
    if (name == "weibull") return BaseFunction::Weibull;
    throw ValidationError("unknown base function '" + name + "'");
}

std::vector<IntensityBin> read_bins_csv(std::istream& in, const std::string& source) {
    const auto lines = csv::read_lines(in);
    if (lines.empty()) throw ParseError(source, 0, "empty file");
    const auto header = csv::split_line(lines.front().second, source, lines.front().first);
    if (header.size() != 3 || csv::trim(header[0]) != "x" || csv::trim(header[1]) != "n_trials" ||
        csv::trim(header[2]) != "n_correct") {
        throw ParseError(source, lines.front().first, "expected header x,n_trials,n_correct");
    }
    std::vector<IntensityBin> bins;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [line_no, text] = lines[i];
        const auto f = csv::split_line(text, source, line_no);
        if (f.size() != 3) throw ParseError(source, line_no, "expected 3 fields");
        try {
            std::size_t pos = 0;
            IntensityBin b;
            const auto xs = csv::trim(f[0]);
            b.x = std::stod(xs, &pos);
            if (pos != xs.size()) throw std::invalid_argument("x");
            b.n_trials = std::stoll(csv::trim(f[1]));
            b.n_correct = std::stoll(csv::trim(f[2]));
            bins.push_back(b);
        } catch (const std::logic_error&) {
            throw ParseError(source, line_no, "non-numeric field");
        }
    }
    return bins;
}

void write_bins_csv(std::ostream& out, std::span<const IntensityBin> bins) {
    out << "x,n_trials,n_correct\n";
    for (const auto& b : bins) out << csv::format_number(b.x) << ',' << b.n_trials << ',' << b.n_correct << '\n';
}

}  // namespace facepsy::psychometric
