#include "facepsy/cohort.hpp"

#include <map>

#include "facepsy/error.hpp"

namespace facepsy::cohort {

namespace {

constexpr Millis kReadingPause{1500};

}  // namespace

json run_session(study::StudyService& service, ManualClock& clock, const std::string& session_id,
                 const std::string& token, observer::Responder& responder, json view) {
    std::map<std::uint32_t, trial::TrialSpec> specs;
    {
        const auto state = service.snapshot();
        for (const auto& t : state.session(session_id)->trials) specs.emplace(t.trial_id, t);
    }
    while (view.at("kind") != "finished") {
        if (view.at("kind") == "instructions") {
            clock.advance(kReadingPause);
            view = service.proceed(session_id, token);
            continue;
        }
        const auto phase = view.at("phase").get<std::string>();
        if (phase == "description") {
            clock.advance(kReadingPause);
            view = service.proceed(session_id, token);
        } else if (phase == "response") {
            const auto id = view.at("trial_id").get<std::uint32_t>();
            const auto r = responder.respond(specs.at(id));
            clock.advance(Millis{r.latency_ms});
            view = service.record_response(session_id, token, id, r.choice, r.confidence, clock.now()).at("view");
        } else {
            clock.set(from_epoch_ms(view.at("phase_deadline").get<std::int64_t>()));
            view = service.next(session_id, token);
        }
    }
    return view;
}

CohortResult simulate_cohort(std::shared_ptr<const catalog::Manifest> manifest, const CohortOptions& options) {
    if (options.participants < 0) throw ValidationError("participants must be >= 0");
    options.model.validate();
    ManualClock clock;
    study::RecordingMailer mailer;
    study::EventLog log;
    study::StudyConfig config;
    config.session = options.session;
    std::uint64_t next_seed = options.seed;
    study::StudyService service(manifest, config, clock, mailer, log, [&] { return next_seed++; });

    for (int i = 0; i < options.participants; ++i) {
        study::RegistrationRequest req;
        req.email = "participant" + std::to_string(i + 1) + "@example.org";
        req.age_bracket = i % study::kAgeBrackets;
        req.gender = i % study::kGenderCodes;
        req.experience = static_cast<study::Experience>(i % 5);
        req.consent = true;
        const auto reg = service.register_participant(req);
        clock.advance(Millis{60'000});
        service.confirm(reg.confirmation_token);
        const auto started = service.start_session(reg.participant_id);

        auto model = options.model;
        model.seed = options.seed * 1'000'003ULL + static_cast<std::uint64_t>(i);
        observer::Responder responder(model, options.sensitivity, options.mean_latency_ms);
        run_session(service, clock, started.record.session_id, started.session_token, responder, started.view);
        clock.advance(Millis{60'000});
    }
    CohortResult out;
    out.online_measures = service.measures();
    out.log = log.entries();
    return out;
}

}  // namespace facepsy::cohort
