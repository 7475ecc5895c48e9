#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facepsy/events.hpp"
#include "facepsy/time.hpp"

namespace facepsy::study {

struct ExclusionCriteria {
    Millis max_duration{6 * 60 * 60 * 1000};  // start to finish, inclusive
    int min_abx_responses = 23;
    int min_two_afc_responses = 27;
};

enum class ExclusionReason {
    NoCompletedSession,     // participant level
    Duration,
    InsufficientResponses,
    RepeatSession,          // completed session after the participant's first
    Incomplete,             // session in progress or abandoned
};

struct SessionSummary {
    std::string session_id;
    std::string participant_id;
    Instant started_at{};
    std::optional<Instant> finished_at;
    SessionStatus status = SessionStatus::InProgress;
    int abx_responses = 0;      // Nondecisions excluded
    int two_afc_responses = 0;
};

struct Exclusion {
    std::string participant_id;
    std::string session_id;  // empty for participant-level exclusions
    ExclusionReason reason = ExclusionReason::Incomplete;
    std::string detail;

    friend auto operator<=>(const Exclusion&, const Exclusion&) = default;
};

struct ExclusionReport {
    std::size_t registered = 0;
    std::size_t participants_with_completion = 0;
    std::size_t completed_sessions = 0;
    /// participant id -> analysed session id, sorted by participant.
    std::map<std::string, std::string> included;
    /// Sorted; a session failing several criteria appears once per reason.
    std::vector<Exclusion> exclusions;

    std::map<ExclusionReason, std::size_t> counts() const;
    friend bool operator==(const ExclusionReport&, const ExclusionReport&) = default;
};

/// A participant is included when their first completed session (by start
/// time, then id) meets the duration and response-count criteria. Later
/// completed sessions are excluded as repeats. Pure function of the sets of
/// participants and sessions.
ExclusionReport apply_exclusion_criteria(std::span<const std::string> registered_participants,
                                         std::span<const SessionSummary> sessions,
                                         const ExclusionCriteria& criteria = {});

std::string to_string(ExclusionReason reason);

}  // namespace facepsy::study
