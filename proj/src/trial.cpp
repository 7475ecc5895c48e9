#include "facepsy/trial.hpp"

#include "facepsy/error.hpp"

namespace facepsy::trial {

namespace {

std::size_t idx(Phase p) { return static_cast<std::size_t>(p); }

Phase next_phase(Phase p) { return static_cast<Phase>(idx(p) + 1); }

void enter(TrialState& s, Phase p, Instant at) {
    s.phase = p;
    s.phase_started[idx(p)] = at;
}

// Applies every timeout that has elapsed by `now`.
void apply_timeouts(TrialState& s, Instant now) {
    if (now < s.last_event_at) throw StateError("event instant precedes the previous event");
    while (auto dl = s.deadline()) {
        if (now < *dl) break;
        if (s.phase == Phase::Response) {
            ResponseRecord r;
            r.trial_id = s.spec.trial_id;
            r.choice = Choice::Nondecision;
            r.latency_ms = s.spec.timeouts.response.count();
            r.recorded_at = *dl;
            r.phase_timestamps = s.phase_started;
            s.record = r;
        }
        enter(s, next_phase(s.phase), *dl);
        if (s.record && s.phase == Phase::Feedback) s.record->phase_timestamps = s.phase_started;
    }
    s.last_event_at = now;
}

}  // namespace

PhaseTimeouts PhaseTimeouts::defaults(ProcedureKind procedure) {
    PhaseTimeouts t;
    if (procedure == ProcedureKind::ABX) t.stimulus = Millis{6'000};
    return t;
}

Millis PhaseTimeouts::inspection(ProcedureKind procedure) const {
    return procedure == ProcedureKind::ABX ? 3 * stimulus : stimulus;
}

void PhaseTimeouts::validate() const {
    if (description.count() <= 0 || stimulus.count() <= 0 || response.count() <= 0 ||
        feedback.count() <= 0) {
        throw ValidationError("phase timeouts must all be positive");
    }
}

void TrialSpec::validate() const {
    std::vector<std::string> problems;
    const std::string who = "trial " + std::to_string(trial_id) + ": ";
    if (target_stimulus.empty()) problems.push_back(who + "target stimulus missing");
    switch (procedure) {
        case ProcedureKind::TwoAFC:
            if (reference_stimuli.size() != 1) problems.push_back(who + "2AFC references exactly 2 stimuli");
            if (!spatial_order) problems.push_back(who + "2AFC requires a spatial order");
            if (!target_manipulated) problems.push_back(who + "2AFC target must be the manipulated image");
            break;
        case ProcedureKind::ABX:
            if (reference_stimuli.size() != 2) problems.push_back(who + "ABX references exactly 3 stimuli");
            if (spatial_order) problems.push_back(who + "spatial order applies to 2AFC only");
            break;
        case ProcedureKind::YesNo:
            if (!reference_stimuli.empty()) problems.push_back(who + "Yes/No shows a single stimulus");
            if (spatial_order) problems.push_back(who + "spatial order applies to 2AFC only");
            break;
    }
    for (const auto& r : reference_stimuli) {
        if (r.empty()) problems.push_back(who + "empty reference stimulus id");
        if (r == target_stimulus) problems.push_back(who + "reference repeats the target stimulus");
    }
    try {
        timeouts.validate();
    } catch (const ValidationError& e) {
        problems.push_back(who + e.what());
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::optional<Instant> TrialState::deadline() const {
    const Instant start = phase_start();
    const auto& t = spec.timeouts;
    switch (phase) {
        case Phase::Description: return start + t.description;
        case Phase::Inspection: return start + t.inspection(spec.procedure);
        case Phase::Response: return start + t.response;
        case Phase::Feedback: return start + t.feedback;
        case Phase::Complete: return std::nullopt;
    }
    return std::nullopt;
}

TrialState start_trial(TrialSpec spec, Instant at) {
    spec.validate();
    TrialState s;
    s.spec = std::move(spec);
    enter(s, Phase::Description, at);
    s.last_event_at = at;
    return s;
}

bool choice_valid_for(ProcedureKind procedure, Choice choice) {
    switch (procedure) {
        case ProcedureKind::TwoAFC: return choice == Choice::A || choice == Choice::B;
        case ProcedureKind::ABX: return choice == Choice::Manipulated || choice == Choice::BonaFide;
        case ProcedureKind::YesNo: return choice == Choice::Yes || choice == Choice::No;
    }
    return false;
}

TrialState advance_phase(TrialState state, const TrialEvent& event) {
    if (const auto* tick = std::get_if<Tick>(&event)) {
        apply_timeouts(state, tick->now);
        return state;
    }

    if (const auto* proceed = std::get_if<ManualProceed>(&event)) {
        apply_timeouts(state, proceed->at);
        if (state.phase != Phase::Description) {
            throw StateError("manual proceed is only possible from the task description (phase is " +
                             to_string(state.phase) + ")");
        }
        enter(state, Phase::Inspection, proceed->at);
        return state;
    }

    const auto& submit = std::get<SubmitResponse>(event);
    if (submit.choice == Choice::Nondecision || !choice_valid_for(state.spec.procedure, submit.choice)) {
        throw ValidationError("choice '" + to_string(submit.choice) + "' is not a valid " +
                              to_string(state.spec.procedure) + " response");
    }
    if (submit.confidence < 0 || submit.confidence > kMaxConfidence) {
        throw ValidationError("confidence must be an integer from 0 to 4");
    }
    apply_timeouts(state, submit.at);
    if (state.phase != Phase::Response) {
        if (state.record && state.record->choice == Choice::Nondecision) {
            throw StateError("response window closed; nondecision already recorded");
        }
        if (state.record) throw StateError("duplicate submission for trial " + std::to_string(state.spec.trial_id));
        throw StateError("responses are accepted only in the response phase (phase is " +
                         to_string(state.phase) + ")");
    }
    ResponseRecord r;
    r.trial_id = state.spec.trial_id;
    r.choice = submit.choice;
    r.confidence = submit.confidence;
    r.latency_ms = (submit.at - state.phase_start()).count();
    r.recorded_at = submit.at;
    r.client_sent_at = submit.client_sent_at;
    enter(state, Phase::Feedback, submit.at);
    r.phase_timestamps = state.phase_started;
    state.record = r;
    return state;
}

TrialState replay_trial(const TrialSpec& spec, Instant start, std::span<const TrialEvent> events) {
    TrialState s = start_trial(spec, start);
    for (const auto& e : events) s = advance_phase(std::move(s), e);
    return s;
}

Outcome score_response(const TrialSpec& spec, const ResponseRecord& record) {
    if (record.trial_id != spec.trial_id) {
        throw ValidationError("response for trial " + std::to_string(record.trial_id) +
                              " scored against trial " + std::to_string(spec.trial_id));
    }
    if (record.choice == Choice::Nondecision) return Outcome::Nondecision;
    bool correct = false;
    switch (spec.procedure) {
        case ProcedureKind::TwoAFC: {
            const bool target_at_a = spec.spatial_order.value_or(SpatialOrder::SignalNoise) == SpatialOrder::SignalNoise;
            correct = (record.choice == Choice::A) == target_at_a;
            break;
        }
        case ProcedureKind::ABX:
            correct = (record.choice == Choice::Manipulated) == spec.target_manipulated;
            break;
        case ProcedureKind::YesNo:
            correct = (record.choice == Choice::Yes) == spec.target_manipulated;
            break;
    }
    return correct ? Outcome::Correct : Outcome::Incorrect;
}

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::Description: return "description";
        case Phase::Inspection: return "inspection";
        case Phase::Response: return "response";
        case Phase::Feedback: return "feedback";
        case Phase::Complete: return "complete";
    }
    return "?";
}

std::string to_string(Choice choice) {
    switch (choice) {
        case Choice::A: return "A";
        case Choice::B: return "B";
        case Choice::Manipulated: return "manipulated";
        case Choice::BonaFide: return "bona_fide";
        case Choice::Yes: return "yes";
        case Choice::No: return "no";
        case Choice::Nondecision: return "nondecision";
    }
    return "?";
}

std::string to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Correct: return "correct";
        case Outcome::Incorrect: return "incorrect";
        case Outcome::Nondecision: return "nondecision";
    }
    return "?";
}

std::string to_string(ProcedureKind procedure) {
    switch (procedure) {
        case ProcedureKind::YesNo: return "yes_no";
        case ProcedureKind::TwoAFC: return "2afc";
        case ProcedureKind::ABX: return "abx";
    }
    return "?";
}

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::array<E, N>& values, const char* what) {
    for (E v : values) {
        if (to_string(v) == s) return v;
    }
    throw ValidationError("unknown " + std::string(what) + " '" + s + "'");
}

}  // namespace

Phase phase_from_string(const std::string& s) {
    return parse_enum(s, std::array{Phase::Description, Phase::Inspection, Phase::Response, Phase::Feedback,
                                    Phase::Complete},
                      "phase");
}

Choice choice_from_string(const std::string& s) {
    return parse_enum(s, std::array{Choice::A, Choice::B, Choice::Manipulated, Choice::BonaFide, Choice::Yes,
                                    Choice::No, Choice::Nondecision},
                      "choice");
}

Outcome outcome_from_string(const std::string& s) {
    return parse_enum(s, std::array{Outcome::Correct, Outcome::Incorrect, Outcome::Nondecision}, "outcome");
}

ProcedureKind procedure_from_string(const std::string& s) {
    return parse_enum(s, std::array{ProcedureKind::YesNo, ProcedureKind::TwoAFC, ProcedureKind::ABX}, "procedure");
}

}  // namespace facepsy::trial
