#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "facepsy/serialization.hpp"
#include "facepsy/service.hpp"

namespace facepsy::server {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "data";  // holds events.jsonl
    std::filesystem::path manifest;
    std::string admin_token;                   // admin routes are disabled when empty
    int sweep_interval_ms = 1000;
    study::StudyConfig study;

    std::filesystem::path event_log_path() const { return data_dir / "events.jsonl"; }
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

/// Fields absent from the JSON keep their defaults.
ServerConfig config_from_json(const json& j);
json config_to_json(const ServerConfig& config);

/// Defaults, then the JSON file (if given), then FACEPSY_* environment
/// variables. Throws ValidationError for malformed values.
ServerConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

}  // namespace facepsy::server
