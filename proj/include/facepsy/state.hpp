#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facepsy/events.hpp"
#include "facepsy/exclusion.hpp"
#include "facepsy/trial.hpp"

namespace facepsy::study {

struct ParticipantState {
    ParticipantProfile profile;
    std::string email_sha256;
    std::string token_sha256;
    Instant token_expires_at{};
    bool token_used = false;
    std::vector<std::string> session_ids;
};

struct SessionState {
    SessionRecord record;
    SessionConfig config;
    std::vector<trial::TrialSpec> trials;
    std::string token_sha256;
    /// Current instruction screen (1-based) while instructions are shown.
    std::optional<int> instruction_screen;
    /// Index into trials of the running trial; trials.size() once all are done.
    std::size_t current = 0;
    std::optional<trial::TrialState> active;
    std::vector<trial::TrialState> finished;  // final states in presentation order
    Instant last_event_at{};

    bool in_instructions() const { return instruction_screen.has_value(); }
    bool open() const { return record.status == SessionStatus::InProgress; }
    /// Responses recorded so far, finished trials first, in trial order.
    std::vector<trial::ResponseRecord> responses() const;
    SessionSummary summary() const;
};

/// State rebuilt by folding the event log. apply() re-runs every trial
/// transition through the trial engine and rejects entries it cannot
/// reproduce.
class StudyState {
public:
    /// Throws CorruptLogError on sequence gaps or inconsistent transitions.
    void apply(const EventLogEntry& entry);
    static StudyState replay(std::span<const EventLogEntry> entries);

    const std::map<std::string, ParticipantState>& participants() const { return participants_; }
    const std::map<std::string, SessionState>& sessions() const { return sessions_; }
    const ParticipantState* participant(const std::string& id) const;
    const SessionState* session(const std::string& id) const;
    /// Participant id registered under a normalized email hash.
    const std::string* participant_by_email(const std::string& email_hash) const;
    const std::string* participant_by_token(const std::string& token_hash) const;

    std::uint64_t last_seq() const { return last_seq_; }

    std::vector<std::string> participant_ids() const;
    std::vector<SessionSummary> session_summaries() const;
    ExclusionReport exclusions(const ExclusionCriteria& criteria = {}) const;

private:
    void apply_phase(SessionState& s, const EventLogEntry& e, const PhaseEntered& p);
    void apply_response(SessionState& s, const EventLogEntry& e, const ResponseSubmitted& r);
    void apply_timeout(SessionState& s, const EventLogEntry& e, const TrialTimedOut& t);

    std::map<std::string, ParticipantState> participants_;
    std::map<std::string, SessionState> sessions_;
    std::map<std::string, std::string> by_email_;
    std::map<std::string, std::string> by_token_;
    std::map<std::string, std::uint64_t> session_seq_;
    std::uint64_t last_seq_ = 0;
};

}  // namespace facepsy::study
