#include "facepsy/exclusion.hpp"

#include <algorithm>
#include <set>

namespace facepsy::study {

std::map<ExclusionReason, std::size_t> ExclusionReport::counts() const {
    std::map<ExclusionReason, std::size_t> out;
    for (const auto& e : exclusions) ++out[e.reason];
    return out;
}

ExclusionReport apply_exclusion_criteria(std::span<const std::string> registered_participants,
                                         std::span<const SessionSummary> sessions,
                                         const ExclusionCriteria& criteria) {
    ExclusionReport report;
    const std::set<std::string> registered(registered_participants.begin(), registered_participants.end());
    report.registered = registered.size();

    std::vector<const SessionSummary*> ordered;
    for (const auto& s : sessions) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(), [](const SessionSummary* a, const SessionSummary* b) {
        if (a->started_at != b->started_at) return a->started_at < b->started_at;
        return a->session_id < b->session_id;
    });

    std::map<std::string, std::string> first_completed;
    for (const auto* s : ordered) {
        auto exclude = [&](ExclusionReason r, std::string detail) {
            report.exclusions.push_back({s->participant_id, s->session_id, r, std::move(detail)});
        };
        if (s->status != SessionStatus::Completed || !s->finished_at) {
            exclude(ExclusionReason::Incomplete, "status " + to_string(s->status));
            continue;
        }
        ++report.completed_sessions;
        if (first_completed.contains(s->participant_id)) {
            exclude(ExclusionReason::RepeatSession, "participant previously completed session " +
                                                        first_completed[s->participant_id]);
            continue;
        }
        first_completed[s->participant_id] = s->session_id;
        bool ok = true;
        const Millis duration = *s->finished_at - s->started_at;
        if (duration > criteria.max_duration) {
            exclude(ExclusionReason::Duration, "duration " + std::to_string(duration.count()) + " ms");
            ok = false;
        }
        if (s->abx_responses < criteria.min_abx_responses || s->two_afc_responses < criteria.min_two_afc_responses) {
            exclude(ExclusionReason::InsufficientResponses,
                    std::to_string(s->abx_responses) + " ABX / " + std::to_string(s->two_afc_responses) +
                        " 2AFC responses");
            ok = false;
        }
        if (ok) report.included[s->participant_id] = s->session_id;
    }
    report.participants_with_completion = first_completed.size();

    for (const auto& p : registered) {
        if (!first_completed.contains(p)) {
            report.exclusions.push_back({p, "", ExclusionReason::NoCompletedSession, "no completed session"});
        }
    }
    std::sort(report.exclusions.begin(), report.exclusions.end());
    return report;
}

std::string to_string(ExclusionReason reason) {
    switch (reason) {
        case ExclusionReason::NoCompletedSession: return "no_completed_session";
        case ExclusionReason::Duration: return "duration";
        case ExclusionReason::InsufficientResponses: return "insufficient_responses";
        case ExclusionReason::RepeatSession: return "repeat_session";
        case ExclusionReason::Incomplete: return "incomplete";
    }
    return "?";
}

}  // namespace facepsy::study
