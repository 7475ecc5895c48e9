#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "facepsy/sdt.hpp"
#include "facepsy/time.hpp"

namespace facepsy::trial {

using ProcedureKind = sdt::Procedure;

enum class Phase { Description, Inspection, Response, Feedback, Complete };
inline constexpr std::size_t kPhaseCount = 5;

/// <s,n> places the manipulated image at label A, <n,s> at label B.
enum class SpatialOrder { SignalNoise, NoiseSignal };

enum class Choice { A, B, Manipulated, BonaFide, Yes, No, Nondecision };

enum class Outcome { Correct, Incorrect, Nondecision };

inline constexpr int kMaxConfidence = 4;

struct PhaseTimeouts {
    Millis description{90'000};
    Millis stimulus{8'000};  // per presentation; ABX shows three in sequence
    Millis response{60'000};
    Millis feedback{10'000};

    static PhaseTimeouts defaults(ProcedureKind procedure);

    /// Total length of the inspection phase for the given procedure.
    Millis inspection(ProcedureKind procedure) const;

    void validate() const;

    friend bool operator==(const PhaseTimeouts&, const PhaseTimeouts&) = default;
};

struct TrialSpec {
    std::uint32_t trial_id = 0;
    ProcedureKind procedure = ProcedureKind::TwoAFC;
    // 2AFC: the manipulated image. ABX: X. Yes/No: the single stimulus.
    std::string target_stimulus;
    // 2AFC: the paired bona fide image. ABX: bona fide reference, manipulated reference.
    std::vector<std::string> reference_stimuli;
    std::optional<SpatialOrder> spatial_order;
    // Ground truth for ABX X and Yes/No; always true for 2AFC.
    bool target_manipulated = true;
    // ABX only: present the manipulated reference first.
    bool references_swapped = false;
    std::optional<double> intensity;
    PhaseTimeouts timeouts;

    /// Throws ValidationError when stimulus counts or fields do not fit the procedure.
    void validate() const;

    friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

struct ResponseRecord {
    std::uint32_t trial_id = 0;
    Choice choice = Choice::Nondecision;
    std::optional<int> confidence;
    std::int64_t latency_ms = 0;
    Instant recorded_at{};
    std::optional<Instant> client_sent_at;
    std::array<std::optional<Instant>, kPhaseCount> phase_timestamps{};

    friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

struct TrialState {
    TrialSpec spec;
    Phase phase = Phase::Description;
    std::array<std::optional<Instant>, kPhaseCount> phase_started{};
    Instant last_event_at{};
    std::optional<ResponseRecord> record;

    Instant phase_start() const { return *phase_started[static_cast<std::size_t>(phase)]; }
    /// Instant at which the current phase times out; nullopt once Complete.
    std::optional<Instant> deadline() const;

    friend bool operator==(const TrialState&, const TrialState&) = default;
};

struct ManualProceed {
    Instant at;
};

struct Tick {
    Instant now;
};

struct SubmitResponse {
    Instant at;
    Choice choice = Choice::Nondecision;
    int confidence = 0;
    std::optional<Instant> client_sent_at;
};

using TrialEvent = std::variant<ManualProceed, Tick, SubmitResponse>;

TrialState start_trial(TrialSpec spec, Instant at);

/// Applies one event. Elapsed timeouts up to the event instant are applied first,
/// each phase being entered at the exact deadline of the previous one.
/// Throws StateError for events illegal in the resulting phase and
/// ValidationError for malformed submissions.
TrialState advance_phase(TrialState state, const TrialEvent& event);

/// Rebuilds a trial from its start instant and event sequence.
TrialState replay_trial(const TrialSpec& spec, Instant start, std::span<const TrialEvent> events);

/// Throws ValidationError if record.trial_id differs from spec.trial_id.
Outcome score_response(const TrialSpec& spec, const ResponseRecord& record);

/// Whether a choice is a legal answer for the procedure (Nondecision excluded).
bool choice_valid_for(ProcedureKind procedure, Choice choice);

std::string to_string(Phase phase);
std::string to_string(Choice choice);
std::string to_string(Outcome outcome);
std::string to_string(ProcedureKind procedure);
/// Inverses of to_string; throw ValidationError for unknown names.
Phase phase_from_string(const std::string& s);
Choice choice_from_string(const std::string& s);
Outcome outcome_from_string(const std::string& s);
ProcedureKind procedure_from_string(const std::string& s);

}  // namespace facepsy::trial
