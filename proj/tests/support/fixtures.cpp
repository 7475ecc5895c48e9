#include "fixtures.hpp"

#include <map>

#include "facepsy/error.hpp"

using namespace facepsy;

namespace testkit {

std::filesystem::path fixture_dir() { return FACEPSY_FIXTURE_DIR; }

std::shared_ptr<const catalog::Manifest> class_manifest() {
    static const auto manifest =
        std::make_shared<const catalog::Manifest>(catalog::load_manifest(fixture_dir() / "difficulty_classes.csv"));
    return manifest;
}

json drive_session(study::StudyService& service, ManualClock& clock, const std::string& session_id,
                   const std::string& token, observer::Responder& responder, json view,
                   const DriveOptions& options) {
    std::map<std::uint32_t, trial::TrialSpec> specs;
    const auto state = service.snapshot();
    for (const auto& t : state.session(session_id)->trials) specs.emplace(t.trial_id, t);
    bool first_screen = true;
    while (view.at("kind") != "finished") {
        if (view.at("kind") == "instructions") {
            clock.advance(first_screen ? options.first_screen_pause : options.pause);
            first_screen = false;
            view = service.proceed(session_id, token);
            continue;
        }
        const auto phase = view.at("phase").get<std::string>();
        const auto id = view.at("trial_id").get<std::uint32_t>();
        if (phase == "description") {
            clock.advance(options.pause);
            view = service.proceed(session_id, token);
        } else if (phase == "response" && !(options.skip && options.skip(specs.at(id)))) {
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

study::SessionStart enrol(study::StudyService& service, ManualClock& clock, study::RecordingMailer& mailer,
                          const std::string& email, study::Experience experience) {
    study::RegistrationRequest req;
    req.email = email;
    req.age_bracket = 1;
    req.gender = 3;
    req.experience = experience;
    req.consent = true;
    const auto reg = service.register_participant(req);
    clock.advance(Millis{30'000});
    service.confirm(mailer.last_for(email)->token);
    return service.start_session(reg.participant_id);
}

ExclusionFixture build_exclusion_fixture() {
    constexpr int kRegistered = 306;
    constexpr int kCompleters = 244;
    constexpr int kDuration = 8;      // participants [0, 8)
    constexpr int kInsufficient = 9;  // [8, 17)
    constexpr int kRepeats = 5;       // [17, 22)
    constexpr int kAbandoned = 3;     // [244, 247)
    constexpr int kConfirmedOnly = 5; // [247, 252)

    ManualClock clock;
    study::RecordingMailer mailer;
    study::EventLog log;
    study::StudyConfig config;
    config.allow_repeat_participation = true;
    config.abandon_after = Millis{7LL * 24 * 60 * 60 * 1000};
    std::uint64_t seed = 500;
    study::StudyService service(class_manifest(), config, clock, mailer, log, [&] { return seed++; });

    observer::ObserverModel model;
    model.d_prime = 1.0;
    std::vector<std::pair<std::string, std::string>> abandoned;

    for (int i = 0; i < kRegistered; ++i) {
        const std::string email = "fixture" + std::to_string(i) + "@example.org";
        study::RegistrationRequest req;
        req.email = email;
        req.age_bracket = i % study::kAgeBrackets;
        req.gender = i % study::kGenderCodes;
        req.experience = static_cast<study::Experience>(i % 5);
        req.consent = true;
        const auto reg = service.register_participant(req);
        clock.advance(Millis{10'000});
        if (i >= kCompleters + kAbandoned + kConfirmedOnly) continue;
        service.confirm(mailer.last_for(email)->token);
        if (i >= kCompleters + kAbandoned) continue;
        const auto started = service.start_session(reg.participant_id);
        if (i >= kCompleters) {
            abandoned.emplace_back(started.record.session_id, started.session_token);
            continue;
        }

        model.seed = 9000 + static_cast<std::uint64_t>(i);
        observer::Responder responder(model);
        DriveOptions opts;
        if (i < kDuration) opts.first_screen_pause = Millis{(6 * 60 + 1) * 60 * 1000};
        if (i >= kDuration && i < kDuration + kInsufficient) {
            int skipped = 0;
            opts.skip = [skipped](const trial::TrialSpec& t) mutable {
                return t.procedure == trial::ProcedureKind::TwoAFC && skipped++ < 4;
            };
        }
        drive_session(service, clock, started.record.session_id, started.session_token, responder, started.view,
                      opts);
        clock.advance(Millis{60'000});
        if (i >= kDuration + kInsufficient && i < kDuration + kInsufficient + kRepeats) {
            const auto again = service.start_session(reg.participant_id);
            model.seed += 100'000;
            observer::Responder second(model);
            drive_session(service, clock, again.record.session_id, again.session_token, second, again.view);
            clock.advance(Millis{60'000});
        }
    }
    clock.advance(config.abandon_after + Millis{60'000});
    service.advance_all();
    for (const auto& [sid, token] : abandoned) {
        if (service.next(sid, token).at("status") != "abandoned") throw StateError("fixture session not abandoned");
    }

    ExclusionFixture fx;
    fx.log = log.entries();
    return fx;
}

}  // namespace testkit
