#include <doctest.h>

#include <vector>

#include "facepsy/error.hpp"
#include "facepsy/trial.hpp"

using namespace facepsy;
using namespace facepsy::trial;

namespace {

const Instant t0 = from_epoch_ms(1'700'000'000'000);

Instant at_s(double s) { return t0 + Millis{static_cast<std::int64_t>(s * 1000)}; }

TrialSpec two_afc(SpatialOrder order = SpatialOrder::SignalNoise) {
    TrialSpec s;
    s.trial_id = 1;
    s.procedure = ProcedureKind::TwoAFC;
    s.target_stimulus = "m1";
    s.reference_stimuli = {"b1"};
    s.spatial_order = order;
    s.timeouts = PhaseTimeouts::defaults(ProcedureKind::TwoAFC);
    return s;
}

TrialSpec abx(bool x_manipulated) {
    TrialSpec s;
    s.trial_id = 2;
    s.procedure = ProcedureKind::ABX;
    s.target_stimulus = "x";
    s.reference_stimuli = {"a", "b"};
    s.target_manipulated = x_manipulated;
    s.timeouts = PhaseTimeouts::defaults(ProcedureKind::ABX);
    return s;
}

TrialSpec yes_no(bool signal) {
    TrialSpec s;
    s.trial_id = 3;
    s.procedure = ProcedureKind::YesNo;
    s.target_stimulus = "y";
    s.target_manipulated = signal;
    s.timeouts = PhaseTimeouts::defaults(ProcedureKind::YesNo);
    return s;
}

TrialState in_response(const TrialSpec& spec) {
    auto s = advance_phase(start_trial(spec, t0), ManualProceed{t0});
    return advance_phase(std::move(s), Tick{t0 + spec.timeouts.inspection(spec.procedure)});
}

}  // namespace

TEST_CASE("default timeouts") {
    const auto t2 = PhaseTimeouts::defaults(ProcedureKind::TwoAFC);
    CHECK(t2.description == Millis{90'000});
    CHECK(t2.inspection(ProcedureKind::TwoAFC) == Millis{8'000});
    CHECK(t2.response == Millis{60'000});
    CHECK(t2.feedback == Millis{10'000});
    const auto ta = PhaseTimeouts::defaults(ProcedureKind::ABX);
    CHECK(ta.stimulus == Millis{6'000});
    CHECK(ta.inspection(ProcedureKind::ABX) == Millis{18'000});
    CHECK_THROWS_AS((PhaseTimeouts{Millis{0}, Millis{1}, Millis{1}, Millis{1}}).validate(), ValidationError);
}

TEST_CASE("description times out after 90 s") {
    auto s = start_trial(two_afc(), t0);
    CHECK(s.phase == Phase::Description);
    s = advance_phase(s, Tick{at_s(89.999)});
    CHECK(s.phase == Phase::Description);
    s = advance_phase(s, Tick{at_s(90)});
    CHECK(s.phase == Phase::Inspection);
    CHECK(s.phase_start() == at_s(90));

    auto late = advance_phase(start_trial(two_afc(), t0), Tick{at_s(91)});
    CHECK(late.phase == Phase::Inspection);
    CHECK(late.phase_start() == at_s(90));
}

TEST_CASE("manual proceed leaves the description early") {
    auto s = advance_phase(start_trial(two_afc(), t0), ManualProceed{at_s(12.5)});
    CHECK(s.phase == Phase::Inspection);
    CHECK(s.phase_start() == at_s(12.5));
    CHECK_THROWS_AS(advance_phase(s, ManualProceed{at_s(13)}), StateError);
}

TEST_CASE("2AFC inspection lasts 8 s and never ends early") {
    auto s = advance_phase(start_trial(two_afc(), t0), ManualProceed{t0});
    s = advance_phase(s, Tick{at_s(7.999)});
    CHECK(s.phase == Phase::Inspection);
    CHECK_THROWS_AS(advance_phase(s, SubmitResponse{at_s(7.999), Choice::A, 3}), StateError);
    s = advance_phase(s, Tick{at_s(8)});
    CHECK(s.phase == Phase::Response);
}

TEST_CASE("ABX inspection is three 6 s presentations") {
    auto s = advance_phase(start_trial(abx(true), t0), ManualProceed{t0});
    CHECK(s.deadline() == at_s(18));
    s = advance_phase(s, Tick{at_s(12)});
    CHECK(s.phase == Phase::Inspection);
    s = advance_phase(s, Tick{at_s(17.999)});
    CHECK(s.phase == Phase::Inspection);
    s = advance_phase(s, Tick{at_s(18)});
    CHECK(s.phase == Phase::Response);
}

TEST_CASE("response timeout records a nondecision") {
    auto s = in_response(two_afc());
    const Instant rs = s.phase_start();
    s = advance_phase(s, Tick{rs + Millis{61'000}});
    CHECK(s.phase == Phase::Feedback);
    REQUIRE(s.record);
    CHECK(s.record->choice == Choice::Nondecision);
    CHECK_FALSE(s.record->confidence);
    CHECK(s.record->latency_ms == 60'000);
    CHECK(s.record->recorded_at == rs + Millis{60'000});
    CHECK(s.phase_start() == rs + Millis{60'000});
    CHECK(score_response(s.spec, *s.record) == Outcome::Nondecision);

    try {
        advance_phase(s, SubmitResponse{rs + Millis{61'000}, Choice::A, 2});
        FAIL("late submission accepted");
    } catch (const StateError& e) {
        CHECK(std::string(e.what()).find("nondecision") != std::string::npos);
    }
}

TEST_CASE("submission records server latency and enters feedback") {
    auto s = in_response(two_afc());
    const Instant rs = s.phase_start();
    s = advance_phase(s, SubmitResponse{rs + Millis{2'400}, Choice::A, 3, rs + Millis{2'350}});
    CHECK(s.phase == Phase::Feedback);
    REQUIRE(s.record);
    CHECK(s.record->latency_ms == 2'400);
    CHECK(s.record->confidence == 3);
    CHECK(s.record->client_sent_at == rs + Millis{2'350});
    CHECK(s.record->phase_timestamps[static_cast<std::size_t>(Phase::Feedback)] == rs + Millis{2'400});
    CHECK_THROWS_AS(advance_phase(s, SubmitResponse{rs + Millis{2'500}, Choice::B, 3}), StateError);
}

TEST_CASE("submission exactly at the deadline is a nondecision") {
    auto s = in_response(two_afc());
    const Instant rs = s.phase_start();
    CHECK_THROWS_AS(advance_phase(s, SubmitResponse{rs + Millis{60'000}, Choice::A, 1}), StateError);
    s = advance_phase(s, SubmitResponse{rs + Millis{59'999}, Choice::A, 1});
    CHECK(s.record->latency_ms == 59'999);
}

TEST_CASE("feedback lasts 10 s without a manual skip") {
    auto s = in_response(two_afc());
    const Instant rs = s.phase_start();
    s = advance_phase(s, SubmitResponse{rs + Millis{1'000}, Choice::B, 0});
    CHECK_THROWS_AS(advance_phase(s, ManualProceed{rs + Millis{2'000}}), StateError);
    s = advance_phase(s, Tick{rs + Millis{10'999}});
    CHECK(s.phase == Phase::Feedback);
    s = advance_phase(s, Tick{rs + Millis{11'000}});
    CHECK(s.phase == Phase::Complete);
    CHECK_FALSE(s.deadline());
}

TEST_CASE("an idle trial cascades through every phase") {
    auto s = advance_phase(start_trial(abx(false), t0), Tick{at_s(1000)});
    CHECK(s.phase == Phase::Complete);
    CHECK(s.phase_started[1] == at_s(90));
    CHECK(s.phase_started[2] == at_s(108));
    CHECK(s.phase_started[3] == at_s(168));
    CHECK(s.phase_started[4] == at_s(178));
    CHECK(s.record->choice == Choice::Nondecision);
}

TEST_CASE("invalid submissions") {
    auto s = in_response(two_afc());
    const Instant rs = s.phase_start();
    CHECK_THROWS_AS(advance_phase(s, SubmitResponse{rs + Millis{100}, Choice::A, 7}), ValidationError);
    CHECK_THROWS_AS(advance_phase(s, SubmitResponse{rs + Millis{100}, Choice::A, -1}), ValidationError);
    CHECK_THROWS_AS(advance_phase(s, SubmitResponse{rs + Millis{100}, Choice::Manipulated, 2}), ValidationError);
    CHECK_THROWS_AS(advance_phase(s, SubmitResponse{rs + Millis{100}, Choice::Nondecision, 2}), ValidationError);
    CHECK_THROWS_AS(advance_phase(s, Tick{rs - Millis{1}}), StateError);
    CHECK(s.phase == Phase::Response);
}

TEST_CASE("replay reproduces states and timestamps") {
    const std::vector<TrialEvent> events{ManualProceed{at_s(3)}, Tick{at_s(5)}, Tick{at_s(11)},
                                         SubmitResponse{at_s(13.2), Choice::B, 4}, Tick{at_s(30)}};
    const auto a = replay_trial(two_afc(SpatialOrder::NoiseSignal), t0, events);
    const auto b = replay_trial(two_afc(SpatialOrder::NoiseSignal), t0, events);
    CHECK(a == b);
    CHECK(a.phase == Phase::Complete);
    CHECK(a.record->latency_ms == 2'200);
    CHECK(score_response(a.spec, *a.record) == Outcome::Correct);
}

TEST_CASE("scoring") {
    ResponseRecord r;
    r.trial_id = 1;
    r.choice = Choice::A;
    CHECK(score_response(two_afc(SpatialOrder::SignalNoise), r) == Outcome::Correct);
    CHECK(score_response(two_afc(SpatialOrder::NoiseSignal), r) == Outcome::Incorrect);
    r.choice = Choice::Nondecision;
    CHECK(score_response(two_afc(), r) == Outcome::Nondecision);

    r.trial_id = 2;
    r.choice = Choice::Manipulated;
    CHECK(score_response(abx(true), r) == Outcome::Correct);
    CHECK(score_response(abx(false), r) == Outcome::Incorrect);
    r.choice = Choice::BonaFide;
    CHECK(score_response(abx(false), r) == Outcome::Correct);

    r.trial_id = 3;
    r.choice = Choice::Yes;
    CHECK(score_response(yes_no(true), r) == Outcome::Correct);
    CHECK(score_response(yes_no(false), r) == Outcome::Incorrect);

    r.trial_id = 9;
    CHECK_THROWS_AS(score_response(yes_no(true), r), ValidationError);
}

TEST_CASE("spec validation") {
    auto s = two_afc();
    s.reference_stimuli = {"b1", "b2"};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = two_afc();
    s.spatial_order.reset();
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = abx(true);
    s.reference_stimuli = {"a"};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = abx(true);
    s.reference_stimuli = {"x", "b"};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = yes_no(true);
    s.reference_stimuli = {"z"};
    CHECK_THROWS_AS(start_trial(s, t0), ValidationError);
}

TEST_CASE("enum names round trip") {
    for (auto p : {Phase::Description, Phase::Inspection, Phase::Response, Phase::Feedback, Phase::Complete}) {
        CHECK(phase_from_string(to_string(p)) == p);
    }
    for (auto c : {Choice::A, Choice::B, Choice::Manipulated, Choice::BonaFide, Choice::Yes, Choice::No,
                   Choice::Nondecision}) {
        CHECK(choice_from_string(to_string(c)) == c);
    }
    for (auto o : {Outcome::Correct, Outcome::Incorrect, Outcome::Nondecision}) CHECK(outcome_from_string(to_string(o)) == o);
    for (auto p : {ProcedureKind::TwoAFC, ProcedureKind::ABX, ProcedureKind::YesNo}) {
        CHECK(procedure_from_string(to_string(p)) == p);
    }
    CHECK_THROWS_AS(choice_from_string("maybe"), ValidationError);
}
