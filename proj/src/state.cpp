#include "facepsy/state.hpp"

#include "facepsy/error.hpp"

namespace facepsy::study {

namespace {

[[noreturn]] void corrupt(const EventLogEntry& e, const std::string& what) {
    throw CorruptLogError("seq " + std::to_string(e.seq) + " (" + event_type_name(e.payload) + "): " + what);
}

}  // namespace

std::vector<trial::ResponseRecord> SessionState::responses() const {
    std::vector<trial::ResponseRecord> out;
    for (const auto& t : finished) {
        if (t.record) out.push_back(*t.record);
    }
    if (active && active->record) out.push_back(*active->record);
    return out;
}

SessionSummary SessionState::summary() const {
    SessionSummary s{record.session_id, record.participant_id, record.started_at, record.finished_at, record.status};
    for (const auto& t : finished) {
        if (!t.record || t.record->choice == trial::Choice::Nondecision) continue;
        if (t.spec.procedure == trial::ProcedureKind::ABX) ++s.abx_responses;
        if (t.spec.procedure == trial::ProcedureKind::TwoAFC) ++s.two_afc_responses;
    }
    return s;
}

void StudyState::apply(const EventLogEntry& e) {
    if (e.seq != last_seq_ + 1) {
        throw CorruptLogError("sequence gap: expected seq " + std::to_string(last_seq_ + 1) + ", found " +
                              std::to_string(e.seq));
    }
    if (!e.session_id.empty()) {
        auto it = session_seq_.find(e.session_id);
        const std::uint64_t last = it == session_seq_.end() ? 0 : it->second;
        if (e.session_seq != last + 1) {
            corrupt(e, "sequence gap in session " + e.session_id + ": expected session_seq " +
                           std::to_string(last + 1));
        }
    }

    if (const auto* r = std::get_if<Registered>(&e.payload)) {
        if (participants_.contains(e.participant_id)) corrupt(e, "participant " + e.participant_id + " already registered");
        if (r->profile.participant_id != e.participant_id) corrupt(e, "profile id differs from entry participant id");
        if (by_email_.contains(r->email_sha256)) corrupt(e, "email already registered");
        ParticipantState p{r->profile, r->email_sha256, r->token_sha256, r->token_expires_at, false, {}};
        by_email_[r->email_sha256] = e.participant_id;
        by_token_[r->token_sha256] = e.participant_id;
        participants_.emplace(e.participant_id, std::move(p));
    } else if (std::holds_alternative<Confirmed>(e.payload)) {
        auto it = participants_.find(e.participant_id);
        if (it == participants_.end()) corrupt(e, "unknown participant " + e.participant_id);
        if (it->second.token_used) corrupt(e, "confirmation token already used");
        it->second.token_used = true;
        it->second.profile.email_confirmed = true;
    } else if (const auto* st = std::get_if<SessionStarted>(&e.payload)) {
        auto pit = participants_.find(st->participant_id);
        if (pit == participants_.end()) corrupt(e, "unknown participant " + st->participant_id);
        if (!pit->second.profile.email_confirmed) corrupt(e, "session started before confirmation");
        if (e.session_id.empty() || sessions_.contains(e.session_id)) corrupt(e, "missing or duplicate session id");
        if (st->config.hash() != st->config_hash) corrupt(e, "config hash mismatch");
        SessionState s;
        s.record = {e.session_id, st->participant_id, st->seed, st->config_hash, e.timestamp, std::nullopt,
                    SessionStatus::InProgress};
        s.config = st->config;
        s.trials = st->trials;
        s.token_sha256 = st->session_token_sha256;
        s.last_event_at = e.timestamp;
        try {
            for (const auto& t : s.trials) t.validate();
        } catch (const ValidationError& ex) {
            corrupt(e, ex.what());
        }
        pit->second.session_ids.push_back(e.session_id);
        sessions_.emplace(e.session_id, std::move(s));
    } else {
        auto sit = sessions_.find(e.session_id);
        if (sit == sessions_.end()) corrupt(e, "unknown session '" + e.session_id + "'");
        SessionState& s = sit->second;
        if (!s.open()) corrupt(e, "session " + e.session_id + " already finished");
        if (e.timestamp < s.last_event_at) corrupt(e, "timestamp precedes the previous session event");
        try {
            if (const auto* p = std::get_if<PhaseEntered>(&e.payload)) {
                apply_phase(s, e, *p);
            } else if (const auto* r = std::get_if<ResponseSubmitted>(&e.payload)) {
                apply_response(s, e, *r);
            } else if (const auto* t = std::get_if<TrialTimedOut>(&e.payload)) {
                apply_timeout(s, e, *t);
            } else {
                const auto& f = std::get<SessionFinished>(e.payload);
                if (f.status == SessionStatus::InProgress) corrupt(e, "finish with status in_progress");
                if (f.status == SessionStatus::Completed && s.current != s.trials.size()) {
                    corrupt(e, "session completed with trials outstanding");
                }
                s.record.status = f.status;
                s.record.finished_at = e.timestamp;
                s.instruction_screen.reset();
            }
        } catch (const StateError& ex) {
            corrupt(e, ex.what());
        } catch (const ValidationError& ex) {
            corrupt(e, ex.what());
        }
        s.last_event_at = e.timestamp;
    }
    if (!e.session_id.empty()) session_seq_[e.session_id] = e.session_seq;
    last_seq_ = e.seq;
}

void StudyState::apply_phase(SessionState& s, const EventLogEntry& e, const PhaseEntered& p) {
    if (p.instruction_screen) {
        const int expected = s.instruction_screen.value_or(0) + 1;
        if (s.current != 0 || s.active || *p.instruction_screen != expected ||
            expected > s.config.instruction_screens) {
            corrupt(e, "unexpected instruction screen " + std::to_string(*p.instruction_screen));
        }
        s.instruction_screen = expected;
        return;
    }
    if (!p.trial_id) corrupt(e, "trial phase without trial id");
    if (p.phase == trial::Phase::Description) {
        if (s.active || s.current >= s.trials.size() || s.trials[s.current].trial_id != *p.trial_id) {
            corrupt(e, "trial " + std::to_string(*p.trial_id) + " started out of order");
        }
        if (s.current == 0 && s.instruction_screen.value_or(0) != s.config.instruction_screens) {
            corrupt(e, "trials started before the instruction screens");
        }
        s.instruction_screen.reset();
        s.active = trial::start_trial(s.trials[s.current], e.timestamp);
        return;
    }
    if (!s.active || s.active->spec.trial_id != *p.trial_id) {
        corrupt(e, "trial " + std::to_string(*p.trial_id) + " is not running");
    }
    auto next = trial::advance_phase(*s.active, trial::Tick{e.timestamp});
    if (p.phase == trial::Phase::Inspection && next.phase == trial::Phase::Description) {
        next = trial::advance_phase(std::move(next), trial::ManualProceed{e.timestamp});
    }
    if (next.phase != p.phase || next.phase_start() != e.timestamp) {
        corrupt(e, "trial engine is in phase " + trial::to_string(next.phase) + " since " +
                       std::to_string(to_epoch_ms(next.phase_start())));
    }
    if (next.phase == trial::Phase::Complete) {
        s.finished.push_back(std::move(next));
        s.active.reset();
        ++s.current;
    } else {
        s.active = std::move(next);
    }
}

void StudyState::apply_response(SessionState& s, const EventLogEntry& e, const ResponseSubmitted& r) {
    if (!s.active || s.active->spec.trial_id != r.trial_id) {
        corrupt(e, "trial " + std::to_string(r.trial_id) + " is not running");
    }
    auto next = trial::advance_phase(*s.active,
                                     trial::SubmitResponse{e.timestamp, r.choice, r.confidence, r.client_sent_at});
    if (next.record->latency_ms != r.latency_ms) corrupt(e, "latency differs from the trial engine");
    s.active = std::move(next);
}

void StudyState::apply_timeout(SessionState& s, const EventLogEntry& e, const TrialTimedOut& t) {
    if (!s.active || s.active->spec.trial_id != t.trial_id) {
        corrupt(e, "trial " + std::to_string(t.trial_id) + " is not running");
    }
    auto next = trial::advance_phase(*s.active, trial::Tick{e.timestamp});
    if (next.phase != trial::Phase::Feedback || !next.record || next.record->choice != trial::Choice::Nondecision ||
        next.record->recorded_at != e.timestamp) {
        corrupt(e, "response window does not close at this instant");
    }
    s.active = std::move(next);
}

StudyState StudyState::replay(std::span<const EventLogEntry> entries) {
    StudyState s;
    for (const auto& e : entries) s.apply(e);
    return s;
}

const ParticipantState* StudyState::participant(const std::string& id) const {
    auto it = participants_.find(id);
    return it == participants_.end() ? nullptr : &it->second;
}

const SessionState* StudyState::session(const std::string& id) const {
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : &it->second;
}

const std::string* StudyState::participant_by_email(const std::string& email_hash) const {
    auto it = by_email_.find(email_hash);
    return it == by_email_.end() ? nullptr : &it->second;
}

const std::string* StudyState::participant_by_token(const std::string& token_hash) const {
    auto it = by_token_.find(token_hash);
    return it == by_token_.end() ? nullptr : &it->second;
}

std::vector<std::string> StudyState::participant_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, p] : participants_) out.push_back(id);
    return out;
}

std::vector<SessionSummary> StudyState::session_summaries() const {
    std::vector<SessionSummary> out;
    for (const auto& [id, s] : sessions_) out.push_back(s.summary());
    return out;
}

ExclusionReport StudyState::exclusions(const ExclusionCriteria& criteria) const {
    const auto ids = participant_ids();
    const auto sums = session_summaries();
    return apply_exclusion_criteria(ids, sums, criteria);
}

}  // namespace facepsy::study
