#include "facepsy/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "facepsy/error.hpp"

namespace facepsy::server {

namespace {

std::int64_t parse_int(const std::string& name, const std::string& value) {
    std::int64_t out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw ValidationError(name + ": expected an integer, got '" + value + "'");
    return out;
}

bool parse_bool(const std::string& name, const std::string& value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw ValidationError(name + ": expected true or false, got '" + value + "'");
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

ServerConfig config_from_json(const json& j) {
    ServerConfig c;
    try {
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
        if (j.contains("manifest")) c.manifest = j.at("manifest").get<std::string>();
        c.admin_token = j.value("admin_token", c.admin_token);
        c.sweep_interval_ms = j.value("sweep_interval_ms", c.sweep_interval_ms);
        if (j.contains("study")) {
            const auto& s = j.at("study");
            if (s.contains("session")) s.at("session").get_to(c.study.session);
            if (s.contains("token_ttl_ms")) c.study.token_ttl = Millis{s.at("token_ttl_ms").get<std::int64_t>()};
            if (s.contains("abandon_after_ms")) {
                c.study.abandon_after = Millis{s.at("abandon_after_ms").get<std::int64_t>()};
            }
            c.study.allow_repeat_participation = s.value("allow_repeat_participation", false);
            c.study.echo_confirmation_token = s.value("echo_confirmation_token", false);
            if (s.contains("exclusion")) {
                const auto& e = s.at("exclusion");
                auto& cr = c.study.criteria;
                if (e.contains("max_duration_ms")) cr.max_duration = Millis{e.at("max_duration_ms").get<std::int64_t>()};
                cr.min_abx_responses = e.value("min_abx_responses", cr.min_abx_responses);
                cr.min_two_afc_responses = e.value("min_two_afc_responses", cr.min_two_afc_responses);
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return c;
}

json config_to_json(const ServerConfig& c) {
    const auto& cr = c.study.criteria;
    return json{{"host", c.host},
                {"port", c.port},
                {"data_dir", c.data_dir.string()},
                {"manifest", c.manifest.string()},
                {"admin_token", c.admin_token.empty() ? "" : "<set>"},
                {"sweep_interval_ms", c.sweep_interval_ms},
                {"study",
                 json{{"session", c.study.session},
                      {"token_ttl_ms", c.study.token_ttl.count()},
                      {"abandon_after_ms", c.study.abandon_after.count()},
                      {"allow_repeat_participation", c.study.allow_repeat_participation},
                      {"echo_confirmation_token", c.study.echo_confirmation_token},
                      {"exclusion", json{{"max_duration_ms", cr.max_duration.count()},
                                         {"min_abx_responses", cr.min_abx_responses},
                                         {"min_two_afc_responses", cr.min_two_afc_responses}}}}}};
}

ServerConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    ServerConfig c;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw NotFoundError("cannot open config " + file->string());
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ParseError(file->string(), 0, e.what());
        }
        c = config_from_json(j);
    }

    auto get = [&](const char* name) { return env(name); };
    if (auto v = get("FACEPSY_HOST")) c.host = *v;
    if (auto v = get("FACEPSY_PORT")) c.port = static_cast<int>(parse_int("FACEPSY_PORT", *v));
    if (auto v = get("FACEPSY_DATA_DIR")) c.data_dir = *v;
    if (auto v = get("FACEPSY_MANIFEST")) c.manifest = *v;
    if (auto v = get("FACEPSY_ADMIN_TOKEN")) c.admin_token = *v;
    if (auto v = get("FACEPSY_ALLOW_REPEAT")) c.study.allow_repeat_participation = parse_bool("FACEPSY_ALLOW_REPEAT", *v);

    auto& counts = c.study.session.counts;
    if (auto v = get("FACEPSY_TWO_AFC_TRIALS")) counts.two_afc = static_cast<int>(parse_int("FACEPSY_TWO_AFC_TRIALS", *v));
    if (auto v = get("FACEPSY_ABX_TRIALS")) counts.abx = static_cast<int>(parse_int("FACEPSY_ABX_TRIALS", *v));
    if (auto v = get("FACEPSY_YES_NO_TRIALS")) counts.yes_no = static_cast<int>(parse_int("FACEPSY_YES_NO_TRIALS", *v));

    auto& o = c.study.session.options;
    auto all = [&](auto member, const char* name) {
        if (auto v = get(name)) {
            const Millis ms{parse_int(name, *v)};
            o.two_afc.*member = ms;
            o.abx.*member = ms;
            o.yes_no.*member = ms;
        }
    };
    all(&trial::PhaseTimeouts::description, "FACEPSY_DESCRIPTION_TIMEOUT_MS");
    all(&trial::PhaseTimeouts::response, "FACEPSY_RESPONSE_TIMEOUT_MS");
    all(&trial::PhaseTimeouts::feedback, "FACEPSY_FEEDBACK_TIMEOUT_MS");
    if (auto v = get("FACEPSY_TWO_AFC_STIMULUS_MS")) o.two_afc.stimulus = Millis{parse_int("FACEPSY_TWO_AFC_STIMULUS_MS", *v)};
    if (auto v = get("FACEPSY_ABX_STIMULUS_MS")) o.abx.stimulus = Millis{parse_int("FACEPSY_ABX_STIMULUS_MS", *v)};

    if (c.port <= 0 || c.port > 65535) throw ValidationError("port must lie in 1..65535");
    if (c.sweep_interval_ms <= 0) throw ValidationError("sweep_interval_ms must be positive");
    c.study.session.validate();
    return c;
}

}  // namespace facepsy::server
