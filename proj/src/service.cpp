#include "facepsy/service.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "facepsy/analysis.hpp"
#include "facepsy/csv.hpp"
#include "facepsy/error.hpp"
#include "facepsy/schedule.hpp"

namespace facepsy::study {

namespace {

using trial::Phase;

std::string numbered_id(char prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%06zu", prefix, n);
    return buf;
}

std::uint64_t random_u64() {
    std::uint64_t v = 0;
    if (RAND_bytes(reinterpret_cast<unsigned char*>(&v), sizeof v) != 1) throw std::runtime_error("RAND_bytes failed");
    return v;
}

std::string correct_choice(const trial::TrialSpec& spec) {
    switch (spec.procedure) {
        case trial::ProcedureKind::TwoAFC:
            return spec.spatial_order == trial::SpatialOrder::SignalNoise ? "A" : "B";
        case trial::ProcedureKind::ABX:
            return trial::to_string(spec.target_manipulated ? trial::Choice::Manipulated : trial::Choice::BonaFide);
        case trial::ProcedureKind::YesNo:
            return trial::to_string(spec.target_manipulated ? trial::Choice::Yes : trial::Choice::No);
    }
    return {};
}

json choices_for(trial::ProcedureKind p) {
    json out = json::array();
    for (auto c : {trial::Choice::A, trial::Choice::B, trial::Choice::Manipulated, trial::Choice::BonaFide,
                   trial::Choice::Yes, trial::Choice::No}) {
        if (trial::choice_valid_for(p, c)) out.push_back(trial::to_string(c));
    }
    return out;
}

}  // namespace

void LoggingMailer::send_confirmation(const std::string& email, const std::string& participant_id,
                                      const std::string& token) {
    std::lock_guard lock(mu_);
    out_ << "confirmation for " << participant_id << " <" << email << ">: " << token << std::endl;
}

void RecordingMailer::send_confirmation(const std::string& email, const std::string& participant_id,
                                        const std::string& token) {
    std::lock_guard lock(mu_);
    messages_.push_back({email, participant_id, token});
}

std::vector<RecordingMailer::Message> RecordingMailer::messages() const {
    std::lock_guard lock(mu_);
    return messages_;
}

std::optional<RecordingMailer::Message> RecordingMailer::last_for(const std::string& email) const {
    std::lock_guard lock(mu_);
    for (auto it = messages_.rbegin(); it != messages_.rend(); ++it) {
        if (it->email == email) return *it;
    }
    return std::nullopt;
}

std::string normalize_email(const std::string& email) {
    std::string out = csv::trim(email);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string random_token() {
    unsigned char buf[16];
    if (RAND_bytes(buf, sizeof buf) != 1) throw std::runtime_error("RAND_bytes failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char b : buf) {
        out += hex[b >> 4];
        out += hex[b & 15];
    }
    return out;
}

StudyService::StudyService(std::shared_ptr<const catalog::Manifest> manifest, StudyConfig config, const Clock& clock,
                           Mailer& mailer, EventLog& log, SeedSource seeds)
    : manifest_(std::move(manifest)),
      config_(std::move(config)),
      clock_(clock),
      mailer_(mailer),
      log_(log),
      seeds_(seeds ? std::move(seeds) : SeedSource(random_u64)),
      state_(StudyState::replay(log.entries())) {
    config_.session.validate();
}

std::size_t StudyService::append(const std::string& session_id, const std::string& participant_id, Instant at,
                                 EventPayload payload) {
    auto entry = log_.prepare(session_id, participant_id, at, std::move(payload));
    state_.apply(entry);
    log_.commit(std::move(entry));
    return 1;
}

RegistrationResult StudyService::register_participant(const RegistrationRequest& request) {
    std::vector<std::string> problems;
    const auto email = normalize_email(request.email);
    const auto at = email.find('@');
    if (at == std::string::npos || at == 0 || at + 1 == email.size()) problems.emplace_back("invalid email address");
    if (!request.consent) problems.emplace_back("missing consent");
    if (request.age_bracket < 0 || request.age_bracket >= kAgeBrackets) {
        problems.emplace_back("age_bracket must be a code from 0 to " + std::to_string(kAgeBrackets - 1));
    }
    if (request.gender < 0 || request.gender >= kGenderCodes) {
        problems.emplace_back("gender must be a code from 0 to " + std::to_string(kGenderCodes - 1));
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));

    RegistrationResult result;
    {
        std::lock_guard lock(mu_);
        const auto email_hash = catalog::sha256_hex(email);
        if (state_.participant_by_email(email_hash)) throw StateError("email already registered");
        const Instant now = clock_.now();
        result.participant_id = numbered_id('P', state_.participants().size() + 1);
        result.confirmation_token = random_token();
        ParticipantProfile profile{result.participant_id, request.age_bracket, request.gender, request.experience, now,
                                   false};
        append("", result.participant_id, now,
               Registered{profile, email_hash, catalog::sha256_hex(result.confirmation_token), now + config_.token_ttl});
    }
    mailer_.send_confirmation(email, result.participant_id, result.confirmation_token);
    return result;
}

std::string StudyService::confirm(const std::string& token) {
    std::lock_guard lock(mu_);
    const auto* pid = state_.participant_by_token(catalog::sha256_hex(token));
    if (!pid) throw NotFoundError("unknown confirmation token");
    const std::string participant_id = *pid;
    const auto& p = *state_.participant(participant_id);
    if (p.token_used) throw StateError("confirmation token already used");
    const Instant now = clock_.now();
    if (now > p.token_expires_at) throw StateError("confirmation token expired");
    append("", participant_id, now, Confirmed{participant_id});
    return participant_id;
}

SessionStart StudyService::start_session(const std::string& participant_id, std::optional<SessionConfig> config,
                                         std::optional<std::uint64_t> seed) {
    std::lock_guard lock(mu_);
    const Instant now = clock_.now();
    const auto* p = state_.participant(participant_id);
    if (!p) throw NotFoundError("unknown participant '" + participant_id + "'");
    if (!p->profile.email_confirmed) throw StateError("email not confirmed");
    if (!p->profile.consent_given_at) throw StateError("consent not recorded");
    for (const auto& sid : p->session_ids) advance_session(sid, now);
    for (const auto& sid : p->session_ids) {
        const auto& s = *state_.session(sid);
        if (s.open()) throw StateError("session " + sid + " is already in progress");
        if (s.record.status == SessionStatus::Completed && !config_.allow_repeat_participation) {
            throw StateError("participant already completed the study");
        }
    }

    SessionConfig cfg = config.value_or(config_.session);
    cfg.validate();
    const std::uint64_t s_seed = seed ? *seed : seeds_();
    auto schedule = schedule::build_schedule_constant(*manifest_, cfg.counts, s_seed, cfg.options);

    SessionStart out;
    const std::string session_id = numbered_id('S', state_.sessions().size() + 1);
    out.session_token = random_token();
    append(session_id, participant_id, now,
           SessionStarted{participant_id, s_seed, cfg.hash(), cfg, schedule.trials,
                          catalog::sha256_hex(out.session_token)});
    if (cfg.instruction_screens > 0) {
        append(session_id, participant_id, now, PhaseEntered{std::nullopt, Phase::Description, 1});
    } else {
        append(session_id, participant_id, now, PhaseEntered{schedule.trials.front().trial_id, Phase::Description, {}});
    }
    const auto& s = *state_.session(session_id);
    out.record = s.record;
    out.view = view(s, now);
    return out;
}

std::size_t StudyService::advance_session(const std::string& session_id, Instant now) {
    std::size_t n = 0;
    for (;;) {
        const SessionState& s = *state_.session(session_id);
        if (!s.open()) return n;
        const std::string pid = s.record.participant_id;
        if (!s.active) {
            const Instant limit = s.last_event_at + config_.abandon_after;
            if (now >= limit) n += append(session_id, pid, limit, SessionFinished{SessionStatus::Abandoned});
            return n;
        }
        const auto dl = s.active->deadline();
        if (!dl || now < *dl) return n;
        const auto tid = s.active->spec.trial_id;
        switch (s.active->phase) {
            case Phase::Description:
                n += append(session_id, pid, *dl, PhaseEntered{tid, Phase::Inspection, {}});
                break;
            case Phase::Inspection:
                n += append(session_id, pid, *dl, PhaseEntered{tid, Phase::Response, {}});
                break;
            case Phase::Response:
                n += append(session_id, pid, *dl, TrialTimedOut{tid});
                n += append(session_id, pid, *dl, PhaseEntered{tid, Phase::Feedback, {}});
                break;
            case Phase::Feedback: {
                n += append(session_id, pid, *dl, PhaseEntered{tid, Phase::Complete, {}});
                const SessionState& after = *state_.session(session_id);
                if (after.current < after.trials.size()) {
                    n += append(session_id, pid, *dl,
                                PhaseEntered{after.trials[after.current].trial_id, Phase::Description, {}});
                } else {
                    n += append(session_id, pid, *dl, SessionFinished{SessionStatus::Completed});
                }
                break;
            }
            case Phase::Complete:
                return n;
        }
    }
}

std::size_t StudyService::advance_all() {
    std::lock_guard lock(mu_);
    const Instant now = clock_.now();
    std::vector<std::string> open;
    for (const auto& [id, s] : state_.sessions()) {
        if (s.open()) open.push_back(id);
    }
    std::size_t n = 0;
    for (const auto& id : open) n += advance_session(id, now);
    return n;
}

const SessionState& StudyService::authorize(const std::string& session_id, const std::string& token) const {
    const auto* s = state_.session(session_id);
    if (!s) throw NotFoundError("unknown session '" + session_id + "'");
    if (token.empty() || catalog::sha256_hex(token) != s->token_sha256) throw UnauthorizedError("invalid session token");
    return *s;
}

json StudyService::next(const std::string& session_id, const std::string& token) {
    std::lock_guard lock(mu_);
    authorize(session_id, token);
    const Instant now = clock_.now();
    advance_session(session_id, now);
    return view(*state_.session(session_id), now);
}

json StudyService::proceed(const std::string& session_id, const std::string& token) {
    std::lock_guard lock(mu_);
    authorize(session_id, token);
    const Instant now = clock_.now();
    advance_session(session_id, now);
    const SessionState& s = *state_.session(session_id);
    if (!s.open()) throw StateError("session is finished");
    const auto& pid = s.record.participant_id;
    if (s.in_instructions()) {
        if (*s.instruction_screen < s.config.instruction_screens) {
            append(session_id, pid, now, PhaseEntered{std::nullopt, Phase::Description, *s.instruction_screen + 1});
        } else {
            append(session_id, pid, now, PhaseEntered{s.trials.front().trial_id, Phase::Description, {}});
        }
    } else if (s.active && s.active->phase == Phase::Description) {
        append(session_id, pid, now, PhaseEntered{s.active->spec.trial_id, Phase::Inspection, {}});
    } else {
        throw StateError("cannot proceed during the " + (s.active ? trial::to_string(s.active->phase) : "current") +
                         " phase");
    }
    return view(*state_.session(session_id), now);
}

json StudyService::record_response(const std::string& session_id, const std::string& token, std::uint32_t trial_id,
                                   trial::Choice choice, int confidence, std::optional<Instant> client_sent_at) {
    std::lock_guard lock(mu_);
    authorize(session_id, token);
    const Instant now = clock_.now();
    advance_session(session_id, now);
    const SessionState& s = *state_.session(session_id);

    const auto spec_it = std::find_if(s.trials.begin(), s.trials.end(),
                                      [&](const trial::TrialSpec& t) { return t.trial_id == trial_id; });
    if (spec_it == s.trials.end()) throw NotFoundError("unknown trial " + std::to_string(trial_id));
    const auto index = static_cast<std::size_t>(spec_it - s.trials.begin());

    if (!s.open()) throw StateError("session is finished");
    trial::TrialState current;
    if (index < s.current) {
        current = s.finished[index];
    } else if (index == s.current && s.active) {
        current = *s.active;
    } else {
        throw StateError("trial " + std::to_string(trial_id) + " has not started");
    }
    // The engine reports malformed choices, closed windows and duplicates.
    auto next = trial::advance_phase(current, trial::SubmitResponse{now, choice, confidence, client_sent_at});

    const auto pid = s.record.participant_id;
    const auto latency = next.record->latency_ms;
    append(session_id, pid, now, ResponseSubmitted{trial_id, choice, confidence, latency, client_sent_at});
    append(session_id, pid, now, PhaseEntered{trial_id, Phase::Feedback, {}});
    return json{{"accepted", true},
                {"trial_id", trial_id},
                {"latency_ms", latency},
                {"recorded_at", to_epoch_ms(now)},
                {"view", view(*state_.session(session_id), now)}};
}

json StudyService::view(const SessionState& s, Instant now) const {
    json v{{"session_id", s.record.session_id},
           {"status", to_string(s.record.status)},
           {"server_time", to_epoch_ms(now)},
           {"progress", json{{"completed", s.current}, {"total", s.trials.size()}}}};
    if (!s.open()) {
        const auto sum = s.summary();
        v["kind"] = "finished";
        v["responses"] = json{{"abx", sum.abx_responses}, {"2afc", sum.two_afc_responses}};
        return v;
    }
    if (s.in_instructions()) {
        v["kind"] = "instructions";
        v["screen"] = *s.instruction_screen;
        v["screens"] = s.config.instruction_screens;
        return v;
    }
    const auto& t = *s.active;
    const auto& spec = t.spec;
    v["kind"] = "trial";
    v["trial_id"] = spec.trial_id;
    v["procedure"] = trial::to_string(spec.procedure);
    v["phase"] = trial::to_string(t.phase);
    v["phase_started_at"] = to_epoch_ms(t.phase_start());
    if (auto dl = t.deadline()) {
        v["phase_deadline"] = to_epoch_ms(*dl);
        v["remaining_ms"] = std::max<std::int64_t>(0, (*dl - now).count());
    }
    v["can_proceed"] = t.phase == Phase::Description;

    auto uri = [&](const std::string& id) { return manifest_->at(id).uri; };
    if (t.phase == Phase::Inspection) {
        json stimuli = json::array();
        switch (spec.procedure) {
            case trial::ProcedureKind::TwoAFC: {
                const bool target_a = spec.spatial_order == trial::SpatialOrder::SignalNoise;
                const auto& foil = spec.reference_stimuli.at(0);
                stimuli.push_back(json{{"label", "A"}, {"uri", uri(target_a ? spec.target_stimulus : foil)}});
                stimuli.push_back(json{{"label", "B"}, {"uri", uri(target_a ? foil : spec.target_stimulus)}});
                break;
            }
            case trial::ProcedureKind::ABX: {
                const auto& bona = spec.reference_stimuli.at(0);
                const auto& manip = spec.reference_stimuli.at(1);
                const bool swapped = spec.references_swapped;
                stimuli.push_back(json{{"label", "A"},
                                       {"role", swapped ? "manipulated" : "bona_fide"},
                                       {"uri", uri(swapped ? manip : bona)}});
                stimuli.push_back(json{{"label", "B"},
                                       {"role", swapped ? "bona_fide" : "manipulated"},
                                       {"uri", uri(swapped ? bona : manip)}});
                stimuli.push_back(json{{"label", "X"}, {"uri", uri(spec.target_stimulus)}});
                const auto per = spec.timeouts.stimulus.count();
                const auto shown = std::min<std::int64_t>(2, (now - t.phase_start()).count() / per);
                v["presenting"] = stimuli[static_cast<std::size_t>(shown)]["label"];
                break;
            }
            case trial::ProcedureKind::YesNo:
                stimuli.push_back(json{{"label", "X"}, {"uri", uri(spec.target_stimulus)}});
                break;
        }
        v["stimuli"] = stimuli;
    }
    if (t.phase == Phase::Response) {
        v["choices"] = choices_for(spec.procedure);
        v["confidence_scale"] = json{{"min", 0}, {"max", trial::kMaxConfidence}};
    }
    if (t.phase == Phase::Feedback && t.record) {
        const auto outcome = trial::score_response(spec, *t.record);
        v["feedback"] = json{{"outcome", trial::to_string(outcome)},
                             {"correct_choice", correct_choice(spec)},
                             {"choice", trial::to_string(t.record->choice)},
                             {"confidence", t.record->confidence ? json(*t.record->confidence) : json(nullptr)},
                             {"latency_ms", t.record->latency_ms}};
    }
    return v;
}

std::optional<json> StudyService::measures_of(const SessionState& s) const {
    if (s.record.status != SessionStatus::Completed) return std::nullopt;
    const auto& profile = state_.participant(s.record.participant_id)->profile;
    const auto input = analysis::score_session(s, profile, *manifest_);
    return analysis::participant_to_json(analysis::measure_participant(input), sdt::Correction::LogLinear);
}

std::string StudyService::export_log() {
    advance_all();
    std::lock_guard lock(mu_);
    std::ostringstream out;
    write_event_log(out, log_.entries());
    return out.str();
}

ExclusionReport StudyService::exclusions() {
    advance_all();
    std::lock_guard lock(mu_);
    return state_.exclusions(config_.criteria);
}

json StudyService::measures() {
    advance_all();
    std::lock_guard lock(mu_);
    json out = json::object();
    for (const auto& [id, s] : state_.sessions()) {
        if (auto m = measures_of(s)) out[id] = *m;
    }
    return out;
}

std::optional<json> StudyService::session_measures(const std::string& session_id) {
    advance_all();
    std::lock_guard lock(mu_);
    const auto* s = state_.session(session_id);
    if (!s) throw NotFoundError("unknown session '" + session_id + "'");
    return measures_of(*s);
}

StudyState StudyService::snapshot() {
    std::lock_guard lock(mu_);
    return state_;
}

}  // namespace facepsy::study
