#pragma once

#include <string>

#include "facepsy/service.hpp"

namespace httplib {
class Server;
}

namespace facepsy::server {

/// Registers the JSON routes:
///   POST /register, POST /confirm, POST /sessions,
///   GET /sessions/{id}/next, POST /sessions/{id}/proceed, POST /sessions/{id}/responses,
///   GET /admin/export, GET /admin/exclusions, GET /admin/measures, GET /health.
/// Session routes need X-Session-Token, admin routes X-Admin-Token.
void install_routes(httplib::Server& server, study::StudyService& service, std::string admin_token);

}  // namespace facepsy::server
