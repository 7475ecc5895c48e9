#include "facepsy/schedule.hpp"

#include <algorithm>

#include "facepsy/rng.hpp"

namespace facepsy::schedule {

using trial::ProcedureKind;
using trial::SpatialOrder;
using trial::TrialSpec;

const trial::PhaseTimeouts& ScheduleOptions::timeouts_for(ProcedureKind p) const {
    switch (p) {
        case ProcedureKind::TwoAFC: return two_afc;
        case ProcedureKind::ABX: return abx;
        case ProcedureKind::YesNo: return yes_no;
    }
    return two_afc;
}

std::size_t Schedule::count(ProcedureKind p) const {
    return static_cast<std::size_t>(
        std::count_if(trials.begin(), trials.end(), [p](const TrialSpec& t) { return t.procedure == p; }));
}

Schedule assemble_constant(const catalog::TrialMaterial& material, std::uint64_t seed, const ScheduleOptions& options) {
    options.two_afc.validate();
    options.abx.validate();
    options.yes_no.validate();
    // Decorrelate from the selection stream that used the same seed.
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);

    const std::size_t n_afc = material.two_afc.size();
    std::vector<SpatialOrder> orders;
    orders.reserve(n_afc);
    for (std::size_t i = 0; i < n_afc / 2; ++i) {
        orders.push_back(SpatialOrder::SignalNoise);
        orders.push_back(SpatialOrder::NoiseSignal);
    }
    if (n_afc % 2 == 1) orders.push_back(rng.index(2) == 0 ? SpatialOrder::SignalNoise : SpatialOrder::NoiseSignal);
    rng.shuffle(std::span(orders));

    std::vector<TrialSpec> trials;
    for (std::size_t i = 0; i < n_afc; ++i) {
        TrialSpec t;
        t.procedure = ProcedureKind::TwoAFC;
        t.target_stimulus = material.two_afc[i].manipulated;
        t.reference_stimuli = {material.two_afc[i].bona_fide};
        t.spatial_order = orders[i];
        t.target_manipulated = true;
        t.timeouts = options.two_afc;
        trials.push_back(std::move(t));
    }
    for (const auto& a : material.abx) {
        TrialSpec t;
        t.procedure = ProcedureKind::ABX;
        t.target_stimulus = a.x;
        t.reference_stimuli = {a.bona_fide_reference, a.manipulated_reference};
        t.target_manipulated = a.x_manipulated;
        t.references_swapped = options.randomize_abx_references && rng.index(2) == 1;
        t.timeouts = options.abx;
        trials.push_back(std::move(t));
    }
    for (const auto& y : material.yes_no) {
        TrialSpec t;
        t.procedure = ProcedureKind::YesNo;
        t.target_stimulus = y.stimulus;
        t.target_manipulated = y.manipulated;
        t.timeouts = options.yes_no;
        trials.push_back(std::move(t));
    }
    rng.shuffle(std::span(trials));
    for (std::size_t i = 0; i < trials.size(); ++i) {
        trials[i].trial_id = static_cast<std::uint32_t>(i + 1);
        trials[i].validate();
    }
    return Schedule{std::move(trials), seed, Method::ConstantStimuli};
}

Schedule build_schedule_constant(const catalog::Manifest& manifest, const catalog::TrialCounts& counts,
                                 std::uint64_t seed, const ScheduleOptions& options) {
    auto schedule = assemble_constant(catalog::select_balanced(manifest, counts, seed), seed, options);
    for (auto& t : schedule.trials) {
        // Distance of the manipulated image on show; a bona fide ABX X is judged
        // against the manipulated reference.
        const std::string* manipulated = nullptr;
        if (t.target_manipulated) {
            manipulated = &t.target_stimulus;
        } else if (t.procedure == trial::ProcedureKind::ABX) {
            manipulated = &t.reference_stimuli[1];
        }
        if (manipulated) t.intensity = manifest.at(*manipulated).distance_score;
    }
    return schedule;
}

}  // namespace facepsy::schedule
