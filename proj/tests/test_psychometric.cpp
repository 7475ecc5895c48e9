#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "facepsy/error.hpp"
#include "facepsy/observer.hpp"
#include "facepsy/psychometric.hpp"
#include "oracle.hpp"

using namespace facepsy;
using namespace facepsy::psychometric;

namespace {

const Params kTrue{0.5, 10.0, 0.5, 0.02, BaseFunction::Logistic};

std::vector<double> eight_levels() {
    std::vector<double> xs;
    for (int i = 0; i < 8; ++i) xs.push_back(0.15 + 0.1 * i);
    return xs;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("evaluate_psi midpoint and asymptotes") {
    CHECK(evaluate_psi(kTrue, 0.5) == doctest::Approx(0.74).epsilon(1e-15));
    CHECK(evaluate_psi(kTrue, -1e6) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(evaluate_psi(kTrue, 1e6) == doctest::Approx(0.98).epsilon(1e-15));
    CHECK(evaluate_psi(kTrue, -std::numeric_limits<double>::infinity()) == doctest::Approx(0.5));
    CHECK(evaluate_psi(kTrue, std::numeric_limits<double>::infinity()) == doctest::Approx(0.98));
}

TEST_CASE("base functions equal one half at alpha") {
    for (auto base : {BaseFunction::Logistic, BaseFunction::CumulativeGaussian, BaseFunction::Weibull}) {
        CHECK(base_value(base, 0.4, 0.4, 3.0) == doctest::Approx(0.5).epsilon(1e-15));
    }
    CHECK(base_value(BaseFunction::CumulativeGaussian, 1.0, 0.0, 1.0) ==
          doctest::Approx(static_cast<double>(oracle::phi(1.0L))).epsilon(1e-14));
    CHECK(base_value(BaseFunction::Weibull, 0.0, 0.5, 2.0) == 0.0);
    CHECK(base_value(BaseFunction::Weibull, -1.0, 0.5, 2.0) == 0.0);
}

TEST_CASE("psi is monotone and bounded by its asymptotes") {
    for (auto base : {BaseFunction::Logistic, BaseFunction::CumulativeGaussian, BaseFunction::Weibull}) {
        for (double gamma : {0.0, 0.25, 0.5}) {
            for (double lambda : {0.0, 0.02, 0.1}) {
                const Params p{0.5, base == BaseFunction::Weibull ? 3.0 : 10.0, gamma, lambda, base};
                double prev = -1.0;
                for (double x = -1.0; x <= 2.0; x += 0.005) {
                    const double v = evaluate_psi(p, x);
                    CHECK(v >= prev);
                    CHECK(v >= gamma);
                    CHECK(v <= 1.0 - lambda + 1e-15);
                    prev = v;
                }
            }
        }
    }
}

TEST_CASE("Params::validate") {
    CHECK_NOTHROW(kTrue.validate());
    CHECK_THROWS_AS((Params{0.5, 0.0, 0.5, 0.0}).validate(), ValidationError);
    CHECK_THROWS_AS((Params{0.5, 1.0, 0.6, 0.4}).validate(), ValidationError);
    CHECK_THROWS_AS((Params{0.5, 1.0, -0.1, 0.0}).validate(), ValidationError);
    CHECK_THROWS_AS((Params{0.0, 1.0, 0.5, 0.0, BaseFunction::Weibull}).validate(), ValidationError);
}

TEST_CASE("threshold_at inverts psi") {
    CHECK(threshold_at(kTrue, 0.74) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(threshold_at(kTrue, kTrue.gamma + (1 - kTrue.gamma - kTrue.lambda) / 2) == doctest::Approx(0.5).epsilon(1e-12));
    for (auto base : {BaseFunction::Logistic, BaseFunction::CumulativeGaussian, BaseFunction::Weibull}) {
        const Params p{0.45, base == BaseFunction::Weibull ? 4.0 : 12.0, 0.5, 0.03, base};
        for (double level = 0.51; level < 0.97; level += 0.01) {
            CHECK_MESSAGE(std::fabs(evaluate_psi(p, threshold_at(p, level)) - level) <= 1e-6,
                          to_string(base) << " level " << level);
        }
    }
    CHECK_THROWS_AS(threshold_at(kTrue, 0.5), DomainError);
    CHECK_THROWS_AS(threshold_at(kTrue, 0.98), DomainError);
    CHECK_THROWS_AS(threshold_at(kTrue, 0.3), DomainError);
}

TEST_CASE("log_likelihood is the binomial kernel") {
    const std::vector<IntensityBin> bins{{0.3, 10, 6}, {0.5, 10, 7}, {0.7, 10, 9}};
    double expected = 0.0;
    for (const auto& b : bins) {
        const double p = evaluate_psi(kTrue, b.x);
        expected += b.n_correct * std::log(p) + (b.n_trials - b.n_correct) * std::log(1 - p);
    }
    CHECK(log_likelihood(kTrue, bins) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("fit recovers generating parameters over 20 seeds") {
    const auto xs = eight_levels();
    std::vector<double> alpha_err, beta_rel;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto bins = observer::simulate_psychometric_bins(kTrue, xs, 200, seed);
        const auto fit = fit_mle(bins, FitOptions{BaseFunction::Logistic, 0.5, 0.1});
        CHECK(fit.params.gamma == 0.5);
        CHECK(fit.params.lambda >= 0.0);
        CHECK(fit.params.lambda <= 0.1);
        CHECK(fit.params.beta > 0.0);
        CHECK(fit.log_likelihood >= log_likelihood(kTrue, bins) - 1e-6);
        CHECK(fit.log_likelihood == doctest::Approx(log_likelihood(fit.params, bins)).epsilon(1e-12));
        alpha_err.push_back(std::fabs(fit.params.alpha - kTrue.alpha));
        beta_rel.push_back(std::fabs(fit.params.beta - kTrue.beta) / kTrue.beta);
    }
    CHECK(median(alpha_err) <= 0.05);
    CHECK(median(beta_rel) <= 0.20);
}

TEST_CASE("fit is deterministic") {
    const auto xs = eight_levels();
    const auto bins = observer::simulate_psychometric_bins(kTrue, xs, 200, 7);
    const auto a = fit_mle(bins, FitOptions{BaseFunction::Logistic, 0.5, 0.1});
    const auto b = fit_mle(bins, FitOptions{BaseFunction::Logistic, 0.5, 0.1});
    CHECK(a.params.alpha == b.params.alpha);
    CHECK(a.params.beta == b.params.beta);
    CHECK(a.params.lambda == b.params.lambda);
    CHECK(a.log_likelihood == b.log_likelihood);
}

TEST_CASE("fit with other bases and free gamma") {
    const auto xs = eight_levels();
    for (auto base : {BaseFunction::CumulativeGaussian, BaseFunction::Weibull}) {
        const Params truth{0.5, base == BaseFunction::Weibull ? 4.0 : 8.0, 0.5, 0.02, base};
        const auto bins = observer::simulate_psychometric_bins(truth, xs, 400, 3);
        const auto fit = fit_mle(bins, FitOptions{base, 0.5, 0.1});
        CHECK(std::fabs(fit.params.alpha - 0.5) <= 0.06);
        CHECK(fit.log_likelihood >= log_likelihood(truth, bins) - 1e-6);
    }
    const Params yesno{0.5, 10.0, 0.1, 0.02, BaseFunction::Logistic};
    const auto bins = observer::simulate_psychometric_bins(yesno, xs, 400, 5);
    const auto fit = fit_mle(bins, FitOptions{BaseFunction::Logistic, std::nullopt, 0.1});
    CHECK(fit.params.gamma == doctest::Approx(0.1).epsilon(0.1));
    CHECK(fit.log_likelihood >= log_likelihood(yesno, bins) - 1e-6);
}

TEST_CASE("monotone increasing data give a positive slope and round-trip threshold") {
    const std::vector<IntensityBin> bins{{0.1, 40, 20}, {0.3, 40, 23}, {0.5, 40, 30}, {0.7, 40, 36}, {0.9, 40, 39}};
    const auto fit = fit_mle(bins, FitOptions{BaseFunction::Logistic, 0.5, 0.1});
    CHECK(fit.params.beta > 0.0);
    CHECK(evaluate_psi(fit.params, 0.9) > evaluate_psi(fit.params, 0.1));
    const double t = threshold_at(fit.params, 0.75);
    CHECK(std::fabs(evaluate_psi(fit.params, t) - 0.75) <= 1e-6);
}

TEST_CASE("flat or degenerate data are unidentifiable") {
    const std::vector<IntensityBin> chance{{0.1, 20, 10}, {0.3, 20, 10}, {0.5, 20, 10}, {0.7, 20, 10}};
    CHECK_THROWS_AS(fit_mle(chance, FitOptions{BaseFunction::Logistic, 0.5, 0.1}), UnidentifiableError);
    const std::vector<IntensityBin> all_correct{{0.1, 20, 20}, {0.3, 20, 20}, {0.5, 20, 20}};
    CHECK_THROWS_AS(fit_mle(all_correct, FitOptions{BaseFunction::Logistic, 0.5, 0.1}), UnidentifiableError);
    const std::vector<IntensityBin> all_wrong{{0.1, 20, 0}, {0.3, 20, 0}, {0.5, 20, 0}};
    CHECK_THROWS_AS(fit_mle(all_wrong, FitOptions{BaseFunction::Logistic, 0.5, 0.1}), UnidentifiableError);
}

TEST_CASE("malformed bins are rejected") {
    const FitOptions opts{BaseFunction::Logistic, 0.5, 0.1};
    CHECK_THROWS_AS(fit_mle(std::vector<IntensityBin>{{0.1, 20, 10}, {0.2, 20, 15}}, opts), ValidationError);
    CHECK_THROWS_AS(fit_mle(std::vector<IntensityBin>{{0.1, 5, 1}, {0.2, 5, 2}, {0.3, 5, 4}}, opts), ValidationError);
    CHECK_THROWS_AS(fit_mle(std::vector<IntensityBin>{{0.1, 20, 1}, {0.1, 20, 2}, {0.3, 20, 4}}, opts), ValidationError);
    CHECK_THROWS_AS(fit_mle(std::vector<IntensityBin>{{0.1, 20, 21}, {0.2, 20, 2}, {0.3, 20, 4}}, opts), ValidationError);
    CHECK_THROWS_AS(fit_mle(std::vector<IntensityBin>{{0.1, 20, 5}, {0.2, 20, 9}, {0.3, 20, 14}},
                            FitOptions{BaseFunction::Logistic, 1.0, 0.1}),
                    ValidationError);
}

TEST_CASE("bins csv round trip and parse errors") {
    const std::vector<IntensityBin> bins{{0.125, 10, 6}, {0.5, 12, 9}, {0.875, 8, 8}};
    std::stringstream ss;
    write_bins_csv(ss, bins);
    const auto back = read_bins_csv(ss);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].x == bins[i].x);
        CHECK(back[i].n_trials == bins[i].n_trials);
        CHECK(back[i].n_correct == bins[i].n_correct);
    }
    std::istringstream bad("x,n_trials,n_correct\n0.1,10,5\n0.2,ten,5\n");
    try {
        read_bins_csv(bad, "bad.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream header("a,b,c\n");
    CHECK_THROWS_AS(read_bins_csv(header), ParseError);
}

TEST_CASE("base names") {
    for (auto base : {BaseFunction::Logistic, BaseFunction::CumulativeGaussian, BaseFunction::Weibull}) {
        CHECK(base_from_string(to_string(base)) == base);
    }
    CHECK_THROWS_AS(base_from_string("probit-ish"), ValidationError);
}
