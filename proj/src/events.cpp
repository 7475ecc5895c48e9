#include "facepsy/events.hpp"

#include <istream>
#include <ostream>

#include "facepsy/csv.hpp"
#include "facepsy/error.hpp"
#include "facepsy/serialization.hpp"

namespace facepsy::study {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

json payload_to_json(const EventPayload& payload) {
    return std::visit(
        overloaded{
            [](const Registered& e) {
                return json{{"profile", e.profile},
                            {"email_sha256", e.email_sha256},
                            {"token_sha256", e.token_sha256},
                            {"token_expires_at", to_epoch_ms(e.token_expires_at)}};
            },
            [](const Confirmed& e) { return json{{"participant_id", e.participant_id}}; },
            [](const SessionStarted& e) {
                return json{{"participant_id", e.participant_id},
                            {"seed", e.seed},
                            {"config_hash", e.config_hash},
                            {"config", e.config},
                            {"trials", e.trials},
                            {"session_token_sha256", e.session_token_sha256}};
            },
            [](const PhaseEntered& e) {
                json j{{"phase", e.instruction_screen ? std::string("instructions") : trial::to_string(e.phase)}};
                j["trial_id"] = e.trial_id ? json(*e.trial_id) : json(nullptr);
                if (e.instruction_screen) j["screen"] = *e.instruction_screen;
                return j;
            },
            [](const ResponseSubmitted& e) {
                return json{{"trial_id", e.trial_id},
                            {"choice", trial::to_string(e.choice)},
                            {"confidence", e.confidence},
                            {"latency_ms", e.latency_ms},
                            {"client_sent_at", instant_to_json(e.client_sent_at)}};
            },
            [](const TrialTimedOut& e) { return json{{"trial_id", e.trial_id}}; },
            [](const SessionFinished& e) { return json{{"status", to_string(e.status)}}; },
        },
        payload);
}

SessionStatus status_from_string(const std::string& s) {
    if (s == "in_progress") return SessionStatus::InProgress;
    if (s == "completed") return SessionStatus::Completed;
    if (s == "abandoned") return SessionStatus::Abandoned;
    throw ValidationError("unknown session status '" + s + "'");
}

EventPayload payload_from_json(const std::string& type, const json& d) {
    if (type == "Registered") {
        return Registered{d.at("profile").get<ParticipantProfile>(), d.at("email_sha256").get<std::string>(),
                          d.at("token_sha256").get<std::string>(),
                          from_epoch_ms(d.at("token_expires_at").get<std::int64_t>())};
    }
    if (type == "Confirmed") return Confirmed{d.at("participant_id").get<std::string>()};
    if (type == "SessionStarted") {
        return SessionStarted{d.at("participant_id").get<std::string>(), d.at("seed").get<std::uint64_t>(),
                              d.at("config_hash").get<std::string>(), d.at("config").get<SessionConfig>(),
                              d.at("trials").get<std::vector<trial::TrialSpec>>(),
                              d.at("session_token_sha256").get<std::string>()};
    }
    if (type == "PhaseEntered") {
        PhaseEntered e;
        const auto phase = d.at("phase").get<std::string>();
        if (phase == "instructions") {
            e.instruction_screen = d.at("screen").get<int>();
        } else {
            e.phase = trial::phase_from_string(phase);
        }
        if (!d.at("trial_id").is_null()) e.trial_id = d.at("trial_id").get<std::uint32_t>();
        return e;
    }
    if (type == "ResponseSubmitted") {
        return ResponseSubmitted{d.at("trial_id").get<std::uint32_t>(),
                                 trial::choice_from_string(d.at("choice").get<std::string>()),
                                 d.at("confidence").get<int>(), d.at("latency_ms").get<std::int64_t>(),
                                 optional_instant(d, "client_sent_at")};
    }
    if (type == "TrialTimedOut") return TrialTimedOut{d.at("trial_id").get<std::uint32_t>()};
    if (type == "SessionFinished") return SessionFinished{status_from_string(d.at("status").get<std::string>())};
    throw ValidationError("unknown event type '" + type + "'");
}

}  // namespace

std::string event_type_name(const EventPayload& payload) {
    return std::visit(overloaded{
                          [](const Registered&) { return "Registered"; },
                          [](const Confirmed&) { return "Confirmed"; },
                          [](const SessionStarted&) { return "SessionStarted"; },
                          [](const PhaseEntered&) { return "PhaseEntered"; },
                          [](const ResponseSubmitted&) { return "ResponseSubmitted"; },
                          [](const TrialTimedOut&) { return "TrialTimedOut"; },
                          [](const SessionFinished&) { return "SessionFinished"; },
                      },
                      payload);
}

std::string to_json_line(const EventLogEntry& entry) {
    json j{{"seq", entry.seq},
           {"session_id", entry.session_id},
           {"session_seq", entry.session_seq},
           {"participant_id", entry.participant_id},
           {"timestamp", to_epoch_ms(entry.timestamp)},
           {"type", event_type_name(entry.payload)},
           {"data", payload_to_json(entry.payload)}};
    return j.dump();
}

EventLogEntry from_json_line(const std::string& line, const std::string& source, std::size_t line_no) {
    try {
        const json j = json::parse(line);
        EventLogEntry e;
        e.seq = j.at("seq").get<std::uint64_t>();
        e.session_id = j.at("session_id").get<std::string>();
        e.session_seq = j.at("session_seq").get<std::uint64_t>();
        e.participant_id = j.at("participant_id").get<std::string>();
        e.timestamp = from_epoch_ms(j.at("timestamp").get<std::int64_t>());
        e.payload = payload_from_json(j.at("type").get<std::string>(), j.at("data"));
        return e;
    } catch (const json::exception& ex) {
        throw ParseError(source, line_no, ex.what());
    } catch (const ValidationError& ex) {
        throw ParseError(source, line_no, ex.what());
    }
}

void validate_sequence(std::span<const EventLogEntry> entries) {
    std::uint64_t expected = 1;
    std::map<std::string, std::uint64_t> per_session;
    for (const auto& e : entries) {
        if (e.seq != expected) {
            throw CorruptLogError("sequence gap: expected seq " + std::to_string(expected) + ", found " +
                                  std::to_string(e.seq));
        }
        ++expected;
        if (e.session_id.empty()) {
            if (e.session_seq != 0) {
                throw CorruptLogError("seq " + std::to_string(e.seq) + ": session_seq without a session");
            }
            continue;
        }
        auto& last = per_session[e.session_id];
        if (e.session_seq != last + 1) {
            throw CorruptLogError("sequence gap in session " + e.session_id + ": expected session_seq " +
                                  std::to_string(last + 1) + ", found " + std::to_string(e.session_seq));
        }
        last = e.session_seq;
    }
}

std::vector<EventLogEntry> read_event_log(std::istream& in, const std::string& source) {
    std::vector<EventLogEntry> out;
    for (const auto& [line_no, text] : csv::read_lines(in)) out.push_back(from_json_line(text, source, line_no));
    validate_sequence(out);
    return out;
}

std::vector<EventLogEntry> read_event_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open event log " + path.string());
    return read_event_log(in, path.string());
}

void write_event_log(std::ostream& out, std::span<const EventLogEntry> entries) {
    for (const auto& e : entries) out << to_json_line(e) << '\n';
}

EventLog::EventLog(const std::filesystem::path& path) {
    if (std::filesystem::exists(path)) {
        entries_ = read_event_log(path);
        for (const auto& e : entries_) {
            if (!e.session_id.empty()) session_seq_[e.session_id] = e.session_seq;
        }
    } else if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    file_.open(path, std::ios::app);
    if (!file_) throw NotFoundError("cannot open event log " + path.string() + " for writing");
}

EventLogEntry EventLog::prepare(std::string session_id, std::string participant_id, Instant timestamp,
                               EventPayload payload) const {
    EventLogEntry e;
    e.seq = last_seq() + 1;
    if (!session_id.empty()) {
        auto it = session_seq_.find(session_id);
        e.session_seq = (it == session_seq_.end() ? 0 : it->second) + 1;
    }
    e.session_id = std::move(session_id);
    e.participant_id = std::move(participant_id);
    e.timestamp = timestamp;
    e.payload = std::move(payload);
    return e;
}

const EventLogEntry& EventLog::commit(EventLogEntry e) {
    if (e.seq != last_seq() + 1) throw CorruptLogError("commit out of sequence at seq " + std::to_string(e.seq));
    if (!e.session_id.empty()) {
        auto& last = session_seq_[e.session_id];
        if (e.session_seq != last + 1) throw CorruptLogError("commit out of session sequence at seq " + std::to_string(e.seq));
        last = e.session_seq;
    }
    if (file_.is_open()) {
        file_ << to_json_line(e) << '\n';
        file_.flush();
    }
    entries_.push_back(std::move(e));
    return entries_.back();
}

void SessionConfig::validate() const {
    std::vector<std::string> problems;
    if (counts.two_afc < 0 || counts.abx < 0 || counts.yes_no < 0) problems.emplace_back("trial counts must be >= 0");
    if (counts.total() <= 0) problems.emplace_back("a session needs at least one trial");
    if (counts.catch_proportion < 0.0 || counts.catch_proportion > 1.0) {
        problems.emplace_back("catch_proportion must lie in [0, 1]");
    }
    if (instruction_screens < 0) problems.emplace_back("instruction_screens must be >= 0");
    for (const auto* t : {&options.two_afc, &options.abx, &options.yes_no}) {
        try {
            t->validate();
        } catch (const ValidationError& e) {
            problems.emplace_back(e.what());
        }
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::string SessionConfig::hash() const {
    // nlohmann objects are key-ordered, so dump() is canonical.
    return catalog::sha256_hex(json(*this).dump());
}

std::string to_string(Experience e) {
    switch (e) {
        case Experience::None: return "none";
        case Experience::Basic: return "basic";
        case Experience::Intermediate: return "intermediate";
        case Experience::Expert: return "expert";
        case Experience::SpecializedProfessional: return "specialized_professional";
    }
    return "?";
}

Experience experience_from_string(const std::string& s) {
    for (auto e : {Experience::None, Experience::Basic, Experience::Intermediate, Experience::Expert,
                   Experience::SpecializedProfessional}) {
        if (to_string(e) == s) return e;
    }
    throw ValidationError("unknown experience level '" + s + "'");
}

std::string to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::InProgress: return "in_progress";
        case SessionStatus::Completed: return "completed";
        case SessionStatus::Abandoned: return "abandoned";
    }
    return "?";
}

}  // namespace facepsy::study
