#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "facepsy/psychometric.hpp"
#include "facepsy/sdt.hpp"
#include "facepsy/trial.hpp"

namespace facepsy::observer {

/// Equal-variance Gaussian observer.
struct ObserverModel {
    double d_prime = 1.0;
    // Yes/No: absolute evidence cut. ABX: additive shift on |x - b| - |x - a|.
    double criterion = 0.0;
    double lapse = 0.0;          // probability of a uniform guess, in [0, 0.5]
    double position_bias = 0.0;  // 2AFC: probability of answering "A" regardless, in [0, 1]
    std::uint64_t seed = 1;

    void validate() const;
};

/// Rows alternate <s,n>, <n,s>; column 0 counts "s = A".
sdt::StimulusResponseTable simulate_2afc(const ObserverModel& model, std::int64_t n_trials);

/// Rows alternate X=s, X=n; column 0 counts "X is manipulated".
sdt::StimulusResponseTable simulate_abx_differencing(const ObserverModel& model, std::int64_t n_trials);

/// Each trial carries a signal with the given probability; column 0 counts "Yes".
sdt::StimulusResponseTable simulate_yesno(const ObserverModel& model, std::int64_t n_trials,
                                          double signal_probability = 0.5);

/// Binomial draws of Psi at each intensity.
std::vector<psychometric::IntensityBin> simulate_psychometric_bins(const psychometric::Params& params,
                                                                   std::span<const double> intensities,
                                                                   std::int64_t trials_per_bin, std::uint64_t seed);

/// d' of an unbiased 2AFC observer whose proportion correct is p.
double dprime_for_2afc_accuracy(double p);

struct SimulatedResponse {
    trial::Choice choice = trial::Choice::Nondecision;
    int confidence = 0;
    std::int64_t latency_ms = 0;
};

/// Answers scheduled trials under the model's decision rules. Sensitivity may
/// depend on the trial (for example on the target's embedding distance).
class Responder {
public:
    using SensitivityFn = std::function<double(const trial::TrialSpec&)>;

    explicit Responder(ObserverModel model, SensitivityFn sensitivity = {}, std::int64_t mean_latency_ms = 2500);

    SimulatedResponse respond(const trial::TrialSpec& spec);

private:
    double draw_normal(double mean);
    int confidence_from(double evidence);

    ObserverModel model_;
    SensitivityFn sensitivity_;
    std::int64_t mean_latency_ms_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace facepsy::observer
