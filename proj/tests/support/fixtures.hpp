#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "facepsy/catalog.hpp"
#include "facepsy/events.hpp"
#include "facepsy/exclusion.hpp"
#include "facepsy/observer.hpp"
#include "facepsy/serialization.hpp"
#include "facepsy/service.hpp"
#include "facepsy/time.hpp"

namespace testkit {

std::filesystem::path fixture_dir();
std::shared_ptr<const facepsy::catalog::Manifest> class_manifest();

struct DriveOptions {
    facepsy::Millis pause{1500};  // on every instruction screen and task description
    facepsy::Millis first_screen_pause{1500};
    /// Trials left unanswered until the response phase times out.
    std::function<bool(const facepsy::trial::TrialSpec&)> skip;
};

/// Plays a started session to the end through the service API.
facepsy::json drive_session(facepsy::study::StudyService& service, facepsy::ManualClock& clock,
                            const std::string& session_id, const std::string& token,
                            facepsy::observer::Responder& responder, facepsy::json view,
                            const DriveOptions& options = {});

/// Registers, confirms and starts a session for a fresh participant.
facepsy::study::SessionStart enrol(facepsy::study::StudyService& service, facepsy::ManualClock& clock,
                                   facepsy::study::RecordingMailer& mailer, const std::string& email,
                                   facepsy::study::Experience experience = facepsy::study::Experience::None);

/// Event log of 306 registrations and 249 completed sessions, of which 8 run
/// over six hours, 9 record too few 2AFC responses and 5 are second sessions
/// of otherwise included participants. 3 further sessions are abandoned.
struct ExclusionFixture {
    std::vector<facepsy::study::EventLogEntry> log;
    std::size_t registered = 306;
    std::size_t completed_sessions = 249;
    std::size_t participants_with_completion = 244;
    std::size_t included = 227;
    std::map<facepsy::study::ExclusionReason, std::size_t> counts{
        {facepsy::study::ExclusionReason::NoCompletedSession, 62},
        {facepsy::study::ExclusionReason::Duration, 8},
        {facepsy::study::ExclusionReason::InsufficientResponses, 9},
        {facepsy::study::ExclusionReason::RepeatSession, 5},
        {facepsy::study::ExclusionReason::Incomplete, 3},
    };
};

ExclusionFixture build_exclusion_fixture();

}  // namespace testkit
