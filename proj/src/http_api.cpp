#include "facepsy/http_api.hpp"

#include <httplib.h>

#include "facepsy/error.hpp"
#include "facepsy/serialization.hpp"

namespace facepsy::server {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message,
                const std::vector<std::string>& details = {}) {
    json body{{"error", kind}, {"message", message}};
    if (!details.empty()) body["violations"] = details;
    send_json(res, status, body);
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
    } catch (const ValidationError& e) {
        send_error(res, 422, "validation", e.what(), e.violations());
    } catch (const UnauthorizedError& e) {
        send_error(res, 401, "unauthorized", e.what());
    } catch (const NotFoundError& e) {
        send_error(res, 404, "not_found", e.what());
    } catch (const StateError& e) {
        send_error(res, 409, "conflict", e.what());
    } catch (const InsufficientMaterialError& e) {
        send_error(res, 500, "insufficient_material", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
    }
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body);
    if (!j.is_object()) throw json::type_error::create(302, "request body must be a JSON object", nullptr);
    return j;
}

}  // namespace

void install_routes(httplib::Server& server, study::StudyService& service, std::string admin_token) {
    auto is_admin = [admin_token](const httplib::Request& req) {
        return !admin_token.empty() && req.get_header_value("X-Admin-Token") == admin_token;
    };
    auto require_admin = [is_admin](const httplib::Request& req) {
        if (!is_admin(req)) throw UnauthorizedError("admin token required");
    };

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"status", "ok"}});
    });

    server.Post("/register", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json j = body_of(req);
            study::RegistrationRequest r;
            r.email = j.value("email", std::string{});
            r.age_bracket = j.value("age_bracket", -1);
            r.gender = j.value("gender", -1);
            r.experience = study::experience_from_string(j.value("experience", std::string{"none"}));
            r.consent = j.value("consent", false);
            const auto result = service.register_participant(r);
            json out{{"participant_id", result.participant_id}, {"email_confirmed", false}};
            if (service.config().echo_confirmation_token) out["confirmation_token"] = result.confirmation_token;
            send_json(res, 201, out);
        });
    });

    server.Post("/confirm", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json j = body_of(req);
            const auto pid = service.confirm(j.at("token").get<std::string>());
            send_json(res, 200, json{{"participant_id", pid}, {"email_confirmed", true}});
        });
    });

    server.Post("/sessions", [&service, is_admin](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json j = body_of(req);
            std::optional<study::SessionConfig> config;
            std::optional<std::uint64_t> seed;
            if (j.contains("config") || j.contains("seed")) {
                if (!is_admin(req)) throw UnauthorizedError("custom session config requires the admin token");
                if (j.contains("config")) config = j.at("config").get<study::SessionConfig>();
                if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
            }
            const auto started = service.start_session(j.at("participant_id").get<std::string>(), config, seed);
            send_json(res, 201,
                      json{{"session", started.record}, {"session_token", started.session_token}, {"view", started.view}});
        });
    });

    server.Get(R"(/sessions/([^/]+)/next)", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            send_json(res, 200, service.next(req.matches[1], req.get_header_value("X-Session-Token")));
        });
    });

    server.Post(R"(/sessions/([^/]+)/proceed)", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            send_json(res, 200, service.proceed(req.matches[1], req.get_header_value("X-Session-Token")));
        });
    });

    server.Post(R"(/sessions/([^/]+)/responses)", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json j = body_of(req);
            const auto choice = trial::choice_from_string(j.at("choice").get<std::string>());
            const auto ack = service.record_response(req.matches[1], req.get_header_value("X-Session-Token"),
                                                     j.at("trial_id").get<std::uint32_t>(), choice,
                                                     j.at("confidence").get<int>(),
                                                     optional_instant(j, "client_sent_at"));
            send_json(res, 200, ack);
        });
    });

    server.Get("/admin/export", [&service, require_admin](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            require_admin(req);
            res.status = 200;
            res.set_content(service.export_log(), "application/x-ndjson");
        });
    });

    server.Get("/admin/exclusions", [&service, require_admin](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            require_admin(req);
            send_json(res, 200, json(service.exclusions()));
        });
    });

    server.Get("/admin/measures", [&service, require_admin](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            require_admin(req);
            send_json(res, 200, service.measures());
        });
    });
}

}  // namespace facepsy::server
