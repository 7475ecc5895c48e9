#include <doctest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "facepsy/analysis.hpp"
#include "facepsy/config.hpp"
#include "facepsy/error.hpp"
#include "facepsy/http_api.hpp"
#include "fixtures.hpp"

using namespace facepsy;

namespace {

server::EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << content;
    return p;
}

// Service plus an httplib server on an ephemeral loopback port.
struct LiveServer {
    ManualClock clock{from_epoch_ms(1'700'000'000'000)};
    study::RecordingMailer mailer;
    study::EventLog log;
    std::unique_ptr<study::StudyService> service;
    httplib::Server http;
    std::thread thread;
    int port = 0;

    explicit LiveServer(study::StudyConfig config = {}) {
        std::uint64_t seed = 31;
        service = std::make_unique<study::StudyService>(testkit::class_manifest(), config, clock, mailer, log,
                                                        [seed]() mutable { return seed++; });
        server::install_routes(http, *service, "admin-secret");
        port = http.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { http.listen_after_bind(); });
        http.wait_until_ready();
    }
    ~LiveServer() {
        http.stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(10, 0);
        return c;
    }
};

json post(httplib::Client& c, const std::string& path, const json& body, int expect,
          const httplib::Headers& headers = {}) {
    auto res = c.Post(path, headers, body.dump(), "application/json");
    REQUIRE(res);
    CHECK_MESSAGE(res->status == expect, path << " -> " << res->body);
    return res->body.empty() ? json() : json::parse(res->body);
}

json get(httplib::Client& c, const std::string& path, int expect, const httplib::Headers& headers = {}) {
    auto res = c.Get(path, headers);
    REQUIRE(res);
    CHECK_MESSAGE(res->status == expect, path << " -> " << res->body);
    return json::parse(res->body);
}

json registration(const std::string& email) {
    return json{{"email", email}, {"age_bracket", 1}, {"gender", 0}, {"experience", "expert"}, {"consent", true}};
}

}  // namespace

TEST_CASE("config defaults") {
    const auto c = server::load_config(std::nullopt, env_of({}));
    CHECK(c.host == "127.0.0.1");
    CHECK(c.port == 8080);
    CHECK(c.event_log_path() == std::filesystem::path("data") / "events.jsonl");
    CHECK(c.study.session.counts.two_afc == 27);
    CHECK(c.study.session.counts.abx == 23);
    CHECK(c.study.session.options.abx.stimulus == Millis{6000});
    CHECK(!c.study.allow_repeat_participation);
    CHECK(c.study.criteria.max_duration == Millis{6LL * 60 * 60 * 1000});
}

TEST_CASE("config file then environment") {
    const auto file = write_temp("facepsy_config_test.json", R"({
        "port": 9000, "admin_token": "file-token", "data_dir": "/tmp/x",
        "study": {"allow_repeat_participation": true, "abandon_after_ms": 1000,
                  "exclusion": {"min_abx_responses": 20}}
    })");
    const auto from_file = server::load_config(file, env_of({}));
    CHECK(from_file.port == 9000);
    CHECK(from_file.admin_token == "file-token");
    CHECK(from_file.data_dir == "/tmp/x");
    CHECK(from_file.study.allow_repeat_participation);
    CHECK(from_file.study.abandon_after == Millis{1000});
    CHECK(from_file.study.criteria.min_abx_responses == 20);
    CHECK(from_file.study.criteria.min_two_afc_responses == 27);

    const auto c = server::load_config(file, env_of({{"FACEPSY_PORT", "9100"},
                                                     {"FACEPSY_ADMIN_TOKEN", "env-token"},
                                                     {"FACEPSY_ALLOW_REPEAT", "false"},
                                                     {"FACEPSY_TWO_AFC_TRIALS", "4"},
                                                     {"FACEPSY_ABX_TRIALS", "3"},
                                                     {"FACEPSY_RESPONSE_TIMEOUT_MS", "30000"},
                                                     {"FACEPSY_ABX_STIMULUS_MS", "5000"}}));
    CHECK(c.port == 9100);
    CHECK(c.admin_token == "env-token");
    CHECK(!c.study.allow_repeat_participation);
    CHECK(c.study.session.counts.total() == 7);
    CHECK(c.study.session.options.two_afc.response == Millis{30000});
    CHECK(c.study.session.options.abx.response == Millis{30000});
    CHECK(c.study.session.options.abx.stimulus == Millis{5000});
    CHECK(c.study.session.options.two_afc.stimulus == Millis{8000});
    CHECK(server::config_to_json(c).at("admin_token") == "<set>");
    std::filesystem::remove(file);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(server::load_config(std::nullopt, env_of({{"FACEPSY_PORT", "eighty"}})), ValidationError);
    CHECK_THROWS_AS(server::load_config(std::nullopt, env_of({{"FACEPSY_PORT", "70000"}})), ValidationError);
    CHECK_THROWS_AS(server::load_config(std::nullopt, env_of({{"FACEPSY_ALLOW_REPEAT", "maybe"}})), ValidationError);
    CHECK_THROWS_AS(server::load_config(std::nullopt, env_of({{"FACEPSY_TWO_AFC_TRIALS", "-1"}})), ValidationError);
    CHECK_THROWS_AS(server::load_config(std::filesystem::path("/nonexistent/config.json"), env_of({})), NotFoundError);
    const auto broken = write_temp("facepsy_config_broken.json", "{\"port\": ");
    CHECK_THROWS_AS(server::load_config(broken, env_of({})), ParseError);
    const auto wrong_type = write_temp("facepsy_config_type.json", R"({"port": "x"})");
    CHECK_THROWS_AS(server::load_config(wrong_type, env_of({})), ValidationError);
    std::filesystem::remove(broken);
    std::filesystem::remove(wrong_type);
}

TEST_CASE("http: registration, confirmation and status codes") {
    LiveServer s;
    auto c = s.client();
    CHECK(get(c, "/health", 200).at("status") == "ok");

    auto bad = registration("x@example.org");
    bad["consent"] = false;
    const auto err = post(c, "/register", bad, 422);
    CHECK(err.at("error") == "validation");
    CHECK(err.at("violations").size() == 1);

    const auto reg = post(c, "/register", registration("x@example.org"), 201);
    CHECK(reg.at("email_confirmed") == false);
    CHECK(!reg.contains("confirmation_token"));
    const auto pid = reg.at("participant_id").get<std::string>();
    CHECK(post(c, "/register", registration("X@example.org"), 409).at("error") == "conflict");

    auto res = c.Post("/register", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(post(c, "/register", json::array(), 400).at("error") == "bad_request");

    CHECK(post(c, "/sessions", {{"participant_id", pid}}, 409).at("error") == "conflict");
    CHECK(post(c, "/confirm", {{"token", "nope"}}, 404).at("error") == "not_found");
    const auto token = s.mailer.last_for("x@example.org")->token;
    CHECK(post(c, "/confirm", {{"token", token}}, 200).at("participant_id") == pid);
    CHECK(post(c, "/confirm", {{"token", token}}, 409).at("error") == "conflict");
    CHECK(post(c, "/confirm", json::object(), 400).at("error") == "bad_request");

    // Custom session settings are an admin privilege.
    CHECK(post(c, "/sessions", {{"participant_id", pid}, {"seed", 5}}, 401).at("error") == "unauthorized");
    const auto started = post(c, "/sessions", {{"participant_id", pid}}, 201);
    const auto sid = started.at("session").at("session_id").get<std::string>();
    const auto st = started.at("session_token").get<std::string>();
    CHECK(started.at("view").at("kind") == "instructions");
    CHECK(post(c, "/sessions", {{"participant_id", pid}}, 409).at("error") == "conflict");

    CHECK(get(c, "/sessions/" + sid + "/next", 401).at("error") == "unauthorized");
    CHECK(get(c, "/sessions/" + sid + "/next", 401, {{"X-Session-Token", "wrong"}}).at("error") == "unauthorized");
    CHECK(get(c, "/sessions/S424242/next", 404, {{"X-Session-Token", st}}).at("error") == "not_found");
    CHECK(get(c, "/sessions/" + sid + "/next", 200, {{"X-Session-Token", st}}).at("kind") == "instructions");
    const auto v = post(c, "/sessions/" + sid + "/proceed", json(), 200, {{"X-Session-Token", st}});
    CHECK(v.at("screen") == 2);
    CHECK(post(c, "/sessions/" + sid + "/responses",
               {{"trial_id", 1}, {"choice", "maybe"}, {"confidence", 2}}, 422, {{"X-Session-Token", st}})
              .at("error") == "validation");
    CHECK(post(c, "/sessions/" + sid + "/responses", {{"trial_id", 1}, {"choice", "A"}, {"confidence", 2}}, 409,
               {{"X-Session-Token", st}})
              .at("error") == "conflict");

    // Admin routes.
    CHECK(get(c, "/admin/exclusions", 401).at("error") == "unauthorized");
    CHECK(get(c, "/admin/measures", 401, {{"X-Admin-Token", "guess"}}).at("error") == "unauthorized");
    auto exp = c.Get("/admin/export", {{"X-Admin-Token", "admin-secret"}});
    REQUIRE(exp);
    CHECK(exp->status == 200);
    CHECK(exp->get_header_value("Content-Type") == "application/x-ndjson");
    std::istringstream lines(exp->body);
    CHECK(study::read_event_log(lines) == s.log.entries());
    const auto ex = get(c, "/admin/exclusions", 200, {{"X-Admin-Token", "admin-secret"}});
    CHECK(ex.at("registered") == 1);
}

TEST_CASE("http: admin-configured session and token echo") {
    study::StudyConfig cfg;
    cfg.echo_confirmation_token = true;
    LiveServer s(cfg);
    auto c = s.client();
    const auto reg = post(c, "/register", registration("y@example.org"), 201);
    post(c, "/confirm", {{"token", reg.at("confirmation_token")}}, 200);
    study::SessionConfig custom;
    custom.counts = {2, 1, 0, 0.0};
    custom.instruction_screens = 0;
    const auto started = post(c, "/sessions",
                              {{"participant_id", reg.at("participant_id")}, {"config", custom}, {"seed", 123}}, 201,
                              {{"X-Admin-Token", "admin-secret"}});
    CHECK(started.at("session").at("seed") == 123);
    CHECK(started.at("view").at("progress").at("total") == 3);
    CHECK(started.at("view").at("phase") == "description");
}

TEST_CASE("http: full 50-trial session matches offline analysis") {
    LiveServer s;
    auto c = s.client();
    const auto reg = post(c, "/register", registration("full@example.org"), 201);
    post(c, "/confirm", {{"token", s.mailer.last_for("full@example.org")->token}}, 200);
    const auto started = post(c, "/sessions", {{"participant_id", reg.at("participant_id")}}, 201);
    const auto sid = started.at("session").at("session_id").get<std::string>();
    const httplib::Headers auth{{"X-Session-Token", started.at("session_token").get<std::string>()}};

    std::map<std::uint32_t, trial::TrialSpec> specs;
    {
        const auto state = s.service->snapshot();
        for (const auto& t : state.session(sid)->trials) specs.emplace(t.trial_id, t);
    }
    observer::ObserverModel model;
    model.seed = 8;
    observer::Responder responder(model);
    json v = started.at("view");
    int requests = 0;
    while (v.at("kind") != "finished" && requests++ < 2000) {
        if (v.at("kind") == "instructions" || v.at("phase") == "description") {
            s.clock.advance(Millis{2000});
            v = post(c, "/sessions/" + sid + "/proceed", json(), 200, auth);
        } else if (v.at("phase") == "response") {
            const auto id = v.at("trial_id").get<std::uint32_t>();
            const auto r = responder.respond(specs.at(id));
            s.clock.advance(Millis{r.latency_ms});
            const auto ack = post(c, "/sessions/" + sid + "/responses",
                                  {{"trial_id", id},
                                   {"choice", trial::to_string(r.choice)},
                                   {"confidence", r.confidence},
                                   {"client_sent_at", to_epoch_ms(s.clock.now()) - 15}},
                                  200, auth);
            CHECK(ack.at("latency_ms") == r.latency_ms);
            v = ack.at("view");
        } else {
            s.clock.set(from_epoch_ms(v.at("phase_deadline").get<std::int64_t>()));
            v = get(c, "/sessions/" + sid + "/next", 200, auth);
        }
    }
    REQUIRE(v.at("kind") == "finished");
    CHECK(v.at("status") == "completed");
    CHECK(v.at("progress").at("completed") == 50);
    CHECK(v.at("responses").at("2afc").get<int>() + v.at("responses").at("abx").get<int>() == 50);

    const httplib::Headers admin{{"X-Admin-Token", "admin-secret"}};
    auto exported = c.Get("/admin/export", admin);
    REQUIRE(exported);
    std::istringstream in(exported->body);
    const auto report = analysis::analyze_log(study::read_event_log(in), *testkit::class_manifest());
    REQUIRE(report.participants.size() == 1);
    const auto online = get(c, "/admin/measures", 200, admin);
    CHECK(online.at(sid) == analysis::participant_to_json(report.participants[0], report.correction));
    CHECK(online.at(sid).at("procedures").at("2afc").at("trials") == 27);
    CHECK(online.at(sid).at("procedures").at("abx").at("trials") == 23);
}
