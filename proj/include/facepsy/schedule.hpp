#pragma once

#include <cstdint>
#include <vector>

#include "facepsy/catalog.hpp"
#include "facepsy/trial.hpp"

namespace facepsy::schedule {

enum class Method { ConstantStimuli, Staircase };

struct ScheduleOptions {
    trial::PhaseTimeouts two_afc = trial::PhaseTimeouts::defaults(trial::ProcedureKind::TwoAFC);
    trial::PhaseTimeouts abx = trial::PhaseTimeouts::defaults(trial::ProcedureKind::ABX);
    trial::PhaseTimeouts yes_no = trial::PhaseTimeouts::defaults(trial::ProcedureKind::YesNo);
    // Default presents the bona fide reference first.
    bool randomize_abx_references = false;

    const trial::PhaseTimeouts& timeouts_for(trial::ProcedureKind p) const;

    friend bool operator==(const ScheduleOptions&, const ScheduleOptions&) = default;
};

struct Schedule {
    std::vector<trial::TrialSpec> trials;  // trial ids are 1..N in presentation order
    std::uint64_t seed = 0;
    Method method = Method::ConstantStimuli;

    std::size_t count(trial::ProcedureKind p) const;

    friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Turns selected material into a pseudorandom trial order. 2AFC spatial
/// orders are counterbalanced so that their counts differ by at most one.
Schedule assemble_constant(const catalog::TrialMaterial& material, std::uint64_t seed,
                           const ScheduleOptions& options = {});

/// select_balanced followed by assemble_constant; deterministic in (manifest, counts, seed).
/// Each trial's intensity is the distance score of its manipulated image.
Schedule build_schedule_constant(const catalog::Manifest& manifest, const catalog::TrialCounts& counts,
                                 std::uint64_t seed, const ScheduleOptions& options = {});

}  // namespace facepsy::schedule
