#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "facepsy/catalog.hpp"
#include "facepsy/schedule.hpp"
#include "facepsy/time.hpp"
#include "facepsy/trial.hpp"

namespace facepsy::study {

/// Self-reported professional experience, ordered.
enum class Experience { None, Basic, Intermediate, Expert, SpecializedProfessional };

enum class SessionStatus { InProgress, Completed, Abandoned };

inline constexpr int kAgeBrackets = 6;   // <18, 18-29, 30-39, 40-49, 50-59, 60+
inline constexpr int kGenderCodes = 4;   // female, male, diverse, not disclosed

struct ParticipantProfile {
    std::string participant_id;
    int age_bracket = 0;
    int gender = 0;
    Experience experience = Experience::None;
    std::optional<Instant> consent_given_at;
    bool email_confirmed = false;

    friend bool operator==(const ParticipantProfile&, const ParticipantProfile&) = default;
};

struct SessionConfig {
    catalog::TrialCounts counts;
    schedule::ScheduleOptions options;
    int instruction_screens = 2;

    void validate() const;
    /// SHA-256 of the canonical JSON form.
    std::string hash() const;

    friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

struct SessionRecord {
    std::string session_id;
    std::string participant_id;
    std::uint64_t seed = 0;
    std::string config_hash;
    Instant started_at{};
    std::optional<Instant> finished_at;
    SessionStatus status = SessionStatus::InProgress;

    friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

// Event payloads. The instant of every event is the entry timestamp.

struct Registered {
    ParticipantProfile profile;
    std::string email_sha256;  // of the trimmed, lower-cased address
    std::string token_sha256;
    Instant token_expires_at{};
    friend bool operator==(const Registered&, const Registered&) = default;
};

struct Confirmed {
    std::string participant_id;
    friend bool operator==(const Confirmed&, const Confirmed&) = default;
};

struct SessionStarted {
    std::string participant_id;
    std::uint64_t seed = 0;
    std::string config_hash;
    SessionConfig config;
    std::vector<trial::TrialSpec> trials;
    std::string session_token_sha256;
    friend bool operator==(const SessionStarted&, const SessionStarted&) = default;
};

/// Either an instruction screen (instruction_screen set, trial_id absent) or a trial phase.
struct PhaseEntered {
    std::optional<std::uint32_t> trial_id;
    trial::Phase phase = trial::Phase::Description;
    std::optional<int> instruction_screen;
    friend bool operator==(const PhaseEntered&, const PhaseEntered&) = default;
};

struct ResponseSubmitted {
    std::uint32_t trial_id = 0;
    trial::Choice choice = trial::Choice::A;
    int confidence = 0;
    std::int64_t latency_ms = 0;
    std::optional<Instant> client_sent_at;
    friend bool operator==(const ResponseSubmitted&, const ResponseSubmitted&) = default;
};

struct TrialTimedOut {
    std::uint32_t trial_id = 0;
    friend bool operator==(const TrialTimedOut&, const TrialTimedOut&) = default;
};

struct SessionFinished {
    SessionStatus status = SessionStatus::Completed;
    friend bool operator==(const SessionFinished&, const SessionFinished&) = default;
};

using EventPayload =
    std::variant<Registered, Confirmed, SessionStarted, PhaseEntered, ResponseSubmitted, TrialTimedOut, SessionFinished>;

struct EventLogEntry {
    std::uint64_t seq = 0;          // global, 1-based, gapless
    std::string session_id;         // empty for participant-level events
    std::uint64_t session_seq = 0;  // per session, 1-based, gapless; 0 without a session
    std::string participant_id;
    Instant timestamp{};
    EventPayload payload;

    friend bool operator==(const EventLogEntry&, const EventLogEntry&) = default;
};

std::string event_type_name(const EventPayload& payload);

/// One compact JSON object per line.
std::string to_json_line(const EventLogEntry& entry);
EventLogEntry from_json_line(const std::string& line, const std::string& source, std::size_t line_no);

/// Throws CorruptLogError on a global or per-session sequence gap.
void validate_sequence(std::span<const EventLogEntry> entries);

std::vector<EventLogEntry> read_event_log(std::istream& in, const std::string& source = "event log");
std::vector<EventLogEntry> read_event_log(const std::filesystem::path& path);
void write_event_log(std::ostream& out, std::span<const EventLogEntry> entries);

/// Append-only event store; mirrors every appended line to a file when opened on one.
/// Not synchronized: callers serialize access.
class EventLog {
public:
    EventLog() = default;
    /// Loads (and validates) existing content, then appends to the same file.
    explicit EventLog(const std::filesystem::path& path);

    /// Entry that append would write next, without writing it.
    EventLogEntry prepare(std::string session_id, std::string participant_id, Instant timestamp,
                          EventPayload payload) const;
    /// Writes a prepared entry; throws CorruptLogError if it is not the next in sequence.
    const EventLogEntry& commit(EventLogEntry entry);
    const EventLogEntry& append(std::string session_id, std::string participant_id, Instant timestamp,
                                EventPayload payload) {
        return commit(prepare(std::move(session_id), std::move(participant_id), timestamp, std::move(payload)));
    }

    const std::vector<EventLogEntry>& entries() const { return entries_; }
    std::uint64_t last_seq() const { return entries_.empty() ? 0 : entries_.back().seq; }

private:
    std::vector<EventLogEntry> entries_;
    std::map<std::string, std::uint64_t> session_seq_;
    std::ofstream file_;
};

std::string to_string(Experience e);
Experience experience_from_string(const std::string& s);
std::string to_string(SessionStatus s);

}  // namespace facepsy::study
