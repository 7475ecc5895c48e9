#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "facepsy/catalog.hpp"
#include "facepsy/events.hpp"
#include "facepsy/observer.hpp"
#include "facepsy/serialization.hpp"
#include "facepsy/service.hpp"

namespace facepsy::cohort {

struct CohortOptions {
    int participants = 227;
    observer::ObserverModel model;
    std::int64_t mean_latency_ms = 2500;
    std::uint64_t seed = 1;
    study::SessionConfig session;
    /// Per-trial sensitivity; model.d_prime for every trial when empty.
    observer::Responder::SensitivityFn sensitivity;
};

struct CohortResult {
    std::vector<study::EventLogEntry> log;
    json online_measures;  // service-computed, keyed by session id
};

/// Participant i registers, confirms and completes one session answered by a
/// Responder seeded from (seed, i). Experience, age and gender codes cycle
/// through their ranges. Deterministic in (manifest, options).
CohortResult simulate_cohort(std::shared_ptr<const catalog::Manifest> manifest, const CohortOptions& options);

/// Drives one started session to the end: leaves each screen and task
/// description after a short pause, waits out stimulus and feedback phases
/// and answers in the response phase. Returns the final view.
json run_session(study::StudyService& service, ManualClock& clock, const std::string& session_id,
                 const std::string& token, observer::Responder& responder, json view);

}  // namespace facepsy::cohort
