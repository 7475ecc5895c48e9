#include "facepsy/serialization.hpp"

#include "facepsy/error.hpp"

namespace facepsy {

json instant_to_json(const std::optional<Instant>& t) {
    return t ? json(to_epoch_ms(*t)) : json(nullptr);
}

std::optional<Instant> optional_instant(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return from_epoch_ms(it->get<std::int64_t>());
}

namespace trial {

void to_json(json& j, const PhaseTimeouts& t) {
    j = json{{"description_ms", t.description.count()},
             {"stimulus_ms", t.stimulus.count()},
             {"response_ms", t.response.count()},
             {"feedback_ms", t.feedback.count()}};
}

void from_json(const json& j, PhaseTimeouts& t) {
    // Partial objects override only the given fields.
    if (j.contains("description_ms")) t.description = Millis{j.at("description_ms").get<std::int64_t>()};
    if (j.contains("stimulus_ms")) t.stimulus = Millis{j.at("stimulus_ms").get<std::int64_t>()};
    if (j.contains("response_ms")) t.response = Millis{j.at("response_ms").get<std::int64_t>()};
    if (j.contains("feedback_ms")) t.feedback = Millis{j.at("feedback_ms").get<std::int64_t>()};
    t.validate();
}

void to_json(json& j, const TrialSpec& s) {
    j = json{{"trial_id", s.trial_id},
             {"procedure", to_string(s.procedure)},
             {"target_stimulus", s.target_stimulus},
             {"reference_stimuli", s.reference_stimuli},
             {"target_manipulated", s.target_manipulated},
             {"references_swapped", s.references_swapped},
             {"timeouts", s.timeouts}};
    j["spatial_order"] = s.spatial_order
                             ? json(*s.spatial_order == SpatialOrder::SignalNoise ? "sn" : "ns")
                             : json(nullptr);
    j["intensity"] = s.intensity ? json(*s.intensity) : json(nullptr);
}

void from_json(const json& j, TrialSpec& s) {
    s.trial_id = j.at("trial_id").get<std::uint32_t>();
    s.procedure = procedure_from_string(j.at("procedure").get<std::string>());
    s.target_stimulus = j.at("target_stimulus").get<std::string>();
    s.reference_stimuli = j.at("reference_stimuli").get<std::vector<std::string>>();
    s.target_manipulated = j.at("target_manipulated").get<bool>();
    s.references_swapped = j.value("references_swapped", false);
    s.timeouts = PhaseTimeouts::defaults(s.procedure);
    if (j.contains("timeouts")) s.timeouts = j.at("timeouts").get<PhaseTimeouts>();
    s.spatial_order.reset();
    if (auto it = j.find("spatial_order"); it != j.end() && !it->is_null()) {
        const auto v = it->get<std::string>();
        if (v == "sn") {
            s.spatial_order = SpatialOrder::SignalNoise;
        } else if (v == "ns") {
            s.spatial_order = SpatialOrder::NoiseSignal;
        } else {
            throw ValidationError("unknown spatial order '" + v + "'");
        }
    }
    s.intensity.reset();
    if (auto it = j.find("intensity"); it != j.end() && !it->is_null()) s.intensity = it->get<double>();
}

void to_json(json& j, const ResponseRecord& r) {
    json phases = json::object();
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        if (r.phase_timestamps[i]) phases[to_string(static_cast<Phase>(i))] = to_epoch_ms(*r.phase_timestamps[i]);
    }
    j = json{{"trial_id", r.trial_id},
             {"choice", to_string(r.choice)},
             {"confidence", r.confidence ? json(*r.confidence) : json(nullptr)},
             {"latency_ms", r.latency_ms},
             {"recorded_at", to_epoch_ms(r.recorded_at)},
             {"client_sent_at", instant_to_json(r.client_sent_at)},
             {"phase_timestamps", phases}};
}

}  // namespace trial

namespace catalog {

void to_json(json& j, const TrialCounts& c) {
    j = json{{"two_afc", c.two_afc}, {"abx", c.abx}, {"yes_no", c.yes_no}, {"catch_proportion", c.catch_proportion}};
}

void from_json(const json& j, TrialCounts& c) {
    c.two_afc = j.value("two_afc", c.two_afc);
    c.abx = j.value("abx", c.abx);
    c.yes_no = j.value("yes_no", c.yes_no);
    c.catch_proportion = j.value("catch_proportion", c.catch_proportion);
}

}  // namespace catalog

namespace schedule {

void to_json(json& j, const ScheduleOptions& o) {
    j = json{{"two_afc", o.two_afc},
             {"abx", o.abx},
             {"yes_no", o.yes_no},
             {"randomize_abx_references", o.randomize_abx_references}};
}

void from_json(const json& j, ScheduleOptions& o) {
    if (j.contains("two_afc")) j.at("two_afc").get_to(o.two_afc);
    if (j.contains("abx")) j.at("abx").get_to(o.abx);
    if (j.contains("yes_no")) j.at("yes_no").get_to(o.yes_no);
    o.randomize_abx_references = j.value("randomize_abx_references", o.randomize_abx_references);
}

}  // namespace schedule

namespace psychometric {

void to_json(json& j, const Params& p) {
    j = json{{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"lambda", p.lambda}, {"base", to_string(p.base)}};
}

}  // namespace psychometric

namespace study {

void to_json(json& j, const ParticipantProfile& p) {
    j = json{{"participant_id", p.participant_id},
             {"age_bracket", p.age_bracket},
             {"gender", p.gender},
             {"experience", to_string(p.experience)},
             {"consent_given_at", instant_to_json(p.consent_given_at)},
             {"email_confirmed", p.email_confirmed}};
}

void from_json(const json& j, ParticipantProfile& p) {
    p.participant_id = j.value("participant_id", std::string{});
    p.age_bracket = j.at("age_bracket").get<int>();
    p.gender = j.at("gender").get<int>();
    p.experience = experience_from_string(j.at("experience").get<std::string>());
    p.consent_given_at = optional_instant(j, "consent_given_at");
    p.email_confirmed = j.value("email_confirmed", false);
}

void to_json(json& j, const SessionConfig& c) {
    j = json{{"counts", c.counts}, {"options", c.options}, {"instruction_screens", c.instruction_screens}};
}

void from_json(const json& j, SessionConfig& c) {
    if (j.contains("counts")) j.at("counts").get_to(c.counts);
    if (j.contains("options")) j.at("options").get_to(c.options);
    c.instruction_screens = j.value("instruction_screens", c.instruction_screens);
}

void to_json(json& j, const SessionRecord& r) {
    j = json{{"session_id", r.session_id},
             {"participant_id", r.participant_id},
             {"seed", r.seed},
             {"config_hash", r.config_hash},
             {"started_at", to_epoch_ms(r.started_at)},
             {"finished_at", instant_to_json(r.finished_at)},
             {"status", to_string(r.status)}};
}

void to_json(json& j, const ExclusionReport& r) {
    json exclusions = json::array();
    for (const auto& e : r.exclusions) {
        exclusions.push_back(json{{"participant_id", e.participant_id},
                                  {"session_id", e.session_id.empty() ? json(nullptr) : json(e.session_id)},
                                  {"reason", to_string(e.reason)},
                                  {"detail", e.detail}});
    }
    json counts = json::object();
    for (const auto& [reason, n] : r.counts()) counts[to_string(reason)] = n;
    j = json{{"registered", r.registered},
             {"participants_with_completion", r.participants_with_completion},
             {"completed_sessions", r.completed_sessions},
             {"included_count", r.included.size()},
             {"included", r.included},
             {"exclusions", exclusions},
             {"counts", counts}};
}

}  // namespace study

}  // namespace facepsy
