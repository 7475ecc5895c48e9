#include "facepsy/observer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facepsy/error.hpp"

namespace facepsy::observer {

namespace {

class Draws {
public:
    explicit Draws(std::uint64_t seed) : engine_(seed) {}
    double normal(double mean) { return mean + normal_(engine_); }
    bool bernoulli(double p) { return uniform_(engine_) < p; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

void require_trials(std::int64_t n) {
    if (n <= 0) throw ValidationError("number of simulated trials must be positive");
}

}  // namespace

void ObserverModel::validate() const {
    std::vector<std::string> problems;
    if (!std::isfinite(d_prime)) problems.emplace_back("d' must be finite");
    if (std::isnan(criterion)) problems.emplace_back("criterion must not be NaN");
    if (!(lapse >= 0.0 && lapse <= 0.5)) problems.emplace_back("lapse must lie in [0, 0.5]");
    if (!(position_bias >= 0.0 && position_bias <= 1.0)) problems.emplace_back("position bias must lie in [0, 1]");
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

sdt::StimulusResponseTable simulate_2afc(const ObserverModel& model, std::int64_t n_trials) {
    model.validate();
    require_trials(n_trials);
    Draws rng(model.seed);
    sdt::StimulusResponseTable t;
    t.procedure = sdt::Procedure::TwoAFC;
    for (std::int64_t i = 0; i < n_trials; ++i) {
        const int row = static_cast<int>(i % 2);  // 0: <s,n>, 1: <n,s>
        const double signal = rng.normal(model.d_prime);
        const double noise = rng.normal(0.0);
        bool says_a;
        if (rng.bernoulli(model.lapse)) {
            says_a = rng.bernoulli(0.5);
        } else if (rng.bernoulli(model.position_bias)) {
            says_a = true;
        } else {
            const double at_a = row == 0 ? signal : noise;
            const double at_b = row == 0 ? noise : signal;
            says_a = at_a > at_b;
        }
        ++t.counts[row][says_a ? 0 : 1];
    }
    return t;
}

sdt::StimulusResponseTable simulate_abx_differencing(const ObserverModel& model, std::int64_t n_trials) {
    model.validate();
    require_trials(n_trials);
    Draws rng(model.seed);
    sdt::StimulusResponseTable t;
    t.procedure = sdt::Procedure::ABX;
    for (std::int64_t i = 0; i < n_trials; ++i) {
        const int row = static_cast<int>(i % 2);  // 0: X = s, 1: X = n
        const double a = rng.normal(0.0);
        const double b = rng.normal(model.d_prime);
        const double x = rng.normal(row == 0 ? model.d_prime : 0.0);
        bool says_signal;
        if (rng.bernoulli(model.lapse)) {
            says_signal = rng.bernoulli(0.5);
        } else {
            says_signal = std::abs(x - b) - std::abs(x - a) + model.criterion < 0.0;
        }
        ++t.counts[row][says_signal ? 0 : 1];
    }
    return t;
}

sdt::StimulusResponseTable simulate_yesno(const ObserverModel& model, std::int64_t n_trials, double signal_probability) {
    model.validate();
    require_trials(n_trials);
    if (!(signal_probability > 0.0 && signal_probability < 1.0)) {
        throw ValidationError("signal probability must lie in (0, 1)");
    }
    Draws rng(model.seed);
    sdt::StimulusResponseTable t;
    t.procedure = sdt::Procedure::YesNo;
    for (std::int64_t i = 0; i < n_trials; ++i) {
        const bool signal = rng.bernoulli(signal_probability);
        const double evidence = rng.normal(signal ? model.d_prime : 0.0);
        const bool yes = rng.bernoulli(model.lapse) ? rng.bernoulli(0.5) : evidence > model.criterion;
        ++t.counts[signal ? 0 : 1][yes ? 0 : 1];
    }
    return t;
}

std::vector<psychometric::IntensityBin> simulate_psychometric_bins(const psychometric::Params& params,
                                                                   std::span<const double> intensities,
                                                                   std::int64_t trials_per_bin, std::uint64_t seed) {
    params.validate();
    require_trials(trials_per_bin);
    std::mt19937_64 engine(seed);
    std::vector<psychometric::IntensityBin> bins;
    for (double x : intensities) {
        std::binomial_distribution<std::int64_t> draw(trials_per_bin, psychometric::evaluate_psi(params, x));
        bins.push_back({x, trials_per_bin, draw(engine)});
    }
    return bins;
}

double dprime_for_2afc_accuracy(double p) {
    const double clamped = std::clamp(p, 0.5, 1.0 - 1e-12);
    return std::numbers::sqrt2 * sdt::inverse_normal_cdf(clamped);
}

Responder::Responder(ObserverModel model, SensitivityFn sensitivity, std::int64_t mean_latency_ms)
    : model_(model), sensitivity_(std::move(sensitivity)), mean_latency_ms_(mean_latency_ms), engine_(model.seed) {
    model_.validate();
    if (mean_latency_ms_ <= 0) throw ValidationError("mean latency must be positive");
}

double Responder::draw_normal(double mean) { return mean + normal_(engine_); }

int Responder::confidence_from(double evidence) {
    return std::clamp(static_cast<int>(std::abs(evidence) * 2.0), 0, trial::kMaxConfidence);
}

SimulatedResponse Responder::respond(const trial::TrialSpec& spec) {
    using trial::Choice;
    const double d = sensitivity_ ? sensitivity_(spec) : model_.d_prime;
    SimulatedResponse r;
    double evidence = 0.0;
    const bool lapse = uniform_(engine_) < model_.lapse;
    const bool guess_first = uniform_(engine_) < 0.5;

    switch (spec.procedure) {
        case trial::ProcedureKind::TwoAFC: {
            const double signal = draw_normal(d);
            const double noise = draw_normal(0.0);
            const bool target_at_a = spec.spatial_order.value_or(trial::SpatialOrder::SignalNoise) ==
                                     trial::SpatialOrder::SignalNoise;
            const double at_a = target_at_a ? signal : noise;
            const double at_b = target_at_a ? noise : signal;
            evidence = at_a - at_b;
            bool says_a = at_a > at_b;
            if (lapse) {
                says_a = guess_first;
            } else if (uniform_(engine_) < model_.position_bias) {
                says_a = true;
            }
            r.choice = says_a ? Choice::A : Choice::B;
            break;
        }
        case trial::ProcedureKind::ABX: {
            const double a = draw_normal(0.0);
            const double b = draw_normal(d);
            const double x = draw_normal(spec.target_manipulated ? d : 0.0);
            evidence = std::abs(x - b) - std::abs(x - a) + model_.criterion;
            const bool manipulated = lapse ? guess_first : evidence < 0.0;
            r.choice = manipulated ? Choice::Manipulated : Choice::BonaFide;
            break;
        }
        case trial::ProcedureKind::YesNo: {
            const double e = draw_normal(spec.target_manipulated ? d : 0.0);
            evidence = e - model_.criterion;
            const bool yes = lapse ? guess_first : evidence > 0.0;
            r.choice = yes ? Choice::Yes : Choice::No;
            break;
        }
    }
    r.confidence = lapse ? 0 : confidence_from(evidence);
    std::exponential_distribution<double> latency(1.0 / static_cast<double>(mean_latency_ms_));
    const auto limit = static_cast<double>(spec.timeouts.response.count() - 1);
    r.latency_ms = static_cast<std::int64_t>(std::min(latency(engine_) + 200.0, limit));
    return r;
}

}  // namespace facepsy::observer
