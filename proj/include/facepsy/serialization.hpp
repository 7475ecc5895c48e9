#pragma once

// JSON mappings for wire and log types. Instants are epoch milliseconds,
// durations are milliseconds, enums are lower-case names.

#include <json.hpp>

#include "facepsy/catalog.hpp"
#include "facepsy/events.hpp"
#include "facepsy/exclusion.hpp"
#include "facepsy/psychometric.hpp"
#include "facepsy/schedule.hpp"
#include "facepsy/trial.hpp"

namespace facepsy {

using json = nlohmann::json;

json instant_to_json(const std::optional<Instant>& t);
std::optional<Instant> optional_instant(const json& j, const char* key);

namespace trial {
void to_json(json& j, const PhaseTimeouts& t);
void from_json(const json& j, PhaseTimeouts& t);
void to_json(json& j, const TrialSpec& s);
void from_json(const json& j, TrialSpec& s);
void to_json(json& j, const ResponseRecord& r);
}  // namespace trial

namespace catalog {
void to_json(json& j, const TrialCounts& c);
void from_json(const json& j, TrialCounts& c);
}  // namespace catalog

namespace schedule {
void to_json(json& j, const ScheduleOptions& o);
void from_json(const json& j, ScheduleOptions& o);
}  // namespace schedule

namespace psychometric {
void to_json(json& j, const Params& p);
}  // namespace psychometric

namespace study {
void to_json(json& j, const ParticipantProfile& p);
void from_json(const json& j, ParticipantProfile& p);
void to_json(json& j, const SessionConfig& c);
void from_json(const json& j, SessionConfig& c);
void to_json(json& j, const SessionRecord& r);
void to_json(json& j, const ExclusionReport& r);
}  // namespace study

}  // namespace facepsy
