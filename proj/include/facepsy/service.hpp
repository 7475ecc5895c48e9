#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "facepsy/catalog.hpp"
#include "facepsy/events.hpp"
#include "facepsy/exclusion.hpp"
#include "facepsy/serialization.hpp"
#include "facepsy/state.hpp"
#include "facepsy/time.hpp"

namespace facepsy::study {

/// Delivers confirmation tokens. Real delivery is left to deployments.
class Mailer {
public:
    virtual ~Mailer() = default;
    virtual void send_confirmation(const std::string& email, const std::string& participant_id,
                                   const std::string& token) = 0;
};

/// Writes one line per message to a stream.
class LoggingMailer final : public Mailer {
public:
    explicit LoggingMailer(std::ostream& out) : out_(out) {}
    void send_confirmation(const std::string& email, const std::string& participant_id,
                           const std::string& token) override;

private:
    std::ostream& out_;
    std::mutex mu_;
};

class RecordingMailer final : public Mailer {
public:
    struct Message {
        std::string email;
        std::string participant_id;
        std::string token;
    };
    void send_confirmation(const std::string& email, const std::string& participant_id,
                           const std::string& token) override;
    std::vector<Message> messages() const;
    std::optional<Message> last_for(const std::string& email) const;

private:
    mutable std::mutex mu_;
    std::vector<Message> messages_;
};

struct StudyConfig {
    SessionConfig session;
    Millis token_ttl{48LL * 60 * 60 * 1000};
    /// Sessions idle on an instruction screen this long are marked abandoned.
    Millis abandon_after{24LL * 60 * 60 * 1000};
    bool allow_repeat_participation = false;
    /// Return confirmation tokens in registration responses (test deployments).
    bool echo_confirmation_token = false;
    ExclusionCriteria criteria;
};

struct RegistrationRequest {
    std::string email;
    int age_bracket = 0;
    int gender = 0;
    Experience experience = Experience::None;
    bool consent = false;
};

struct RegistrationResult {
    std::string participant_id;
    std::string confirmation_token;
};

struct SessionStart {
    SessionRecord record;
    std::string session_token;
    json view;
};

/// Event-sourced study host. Every command appends events to the log and
/// folds them into the in-memory state; server time from the injected clock
/// is authoritative. Thread-safe: commands are serialized by one mutex.
class StudyService {
public:
    using SeedSource = std::function<std::uint64_t()>;

    /// Replays the log's existing entries. Throws CorruptLogError if they do not replay.
    StudyService(std::shared_ptr<const catalog::Manifest> manifest, StudyConfig config, const Clock& clock,
                 Mailer& mailer, EventLog& log, SeedSource seeds = {});

    /// Throws ValidationError for missing consent or malformed fields and
    /// StateError for an already registered email.
    RegistrationResult register_participant(const RegistrationRequest& request);

    /// Single-use, expiring. Returns the participant id.
    std::string confirm(const std::string& token);

    /// Throws StateError if unconfirmed, already completed or a session is running.
    SessionStart start_session(const std::string& participant_id, std::optional<SessionConfig> config = {},
                               std::optional<std::uint64_t> seed = {});

    /// Current participant view after applying elapsed timeouts.
    json next(const std::string& session_id, const std::string& token);

    /// Leaves an instruction screen or the task description.
    json proceed(const std::string& session_id, const std::string& token);

    json record_response(const std::string& session_id, const std::string& token, std::uint32_t trial_id,
                         trial::Choice choice, int confidence, std::optional<Instant> client_sent_at = {});

    /// Applies elapsed timeouts and abandonment to every open session.
    /// Returns the number of events appended.
    std::size_t advance_all();

    std::string export_log();
    ExclusionReport exclusions();
    /// Measures of completed sessions keyed by session id.
    json measures();
    std::optional<json> session_measures(const std::string& session_id);

    /// Consistent copy of the folded state.
    StudyState snapshot();
    const StudyConfig& config() const { return config_; }
    const catalog::Manifest& manifest() const { return *manifest_; }

private:
    std::size_t append(const std::string& session_id, const std::string& participant_id, Instant at,
                       EventPayload payload);
    std::size_t advance_session(const std::string& session_id, Instant now);
    const SessionState& authorize(const std::string& session_id, const std::string& token) const;
    json view(const SessionState& s, Instant now) const;
    std::optional<json> measures_of(const SessionState& s) const;

    std::shared_ptr<const catalog::Manifest> manifest_;
    StudyConfig config_;
    const Clock& clock_;
    Mailer& mailer_;
    EventLog& log_;
    SeedSource seeds_;
    StudyState state_;
    std::mutex mu_;
};

std::string normalize_email(const std::string& email);
/// 32 lowercase hex characters from the OpenSSL CSPRNG.
std::string random_token();

}  // namespace facepsy::study
