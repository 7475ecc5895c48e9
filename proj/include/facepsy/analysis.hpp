#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facepsy/catalog.hpp"
#include "facepsy/events.hpp"
#include "facepsy/exclusion.hpp"
#include "facepsy/psychometric.hpp"
#include "facepsy/sdt.hpp"
#include "facepsy/serialization.hpp"
#include "facepsy/state.hpp"

namespace facepsy::analysis {

struct ScoredTrial {
    std::uint32_t trial_id = 0;
    trial::ProcedureKind procedure = trial::ProcedureKind::TwoAFC;
    bool signal_row = false;       // 2AFC: order <s,n>; ABX and Yes/No: target manipulated
    bool signal_response = false;  // 2AFC: "A"; ABX: "manipulated"; Yes/No: "yes"
    trial::Choice choice = trial::Choice::Nondecision;
    trial::Outcome outcome = trial::Outcome::Nondecision;
    std::optional<int> confidence;
    std::int64_t latency_ms = 0;
    std::string target_stimulus;
    // Class and distance of the manipulated image shown; absent for Yes/No catch trials.
    std::optional<catalog::StimulusClass> stimulus_class;
    std::optional<double> distance_score;

    bool responded() const { return outcome != trial::Outcome::Nondecision; }
};

struct ParticipantInput {
    std::string participant_id;
    std::string session_id;
    study::Experience experience = study::Experience::None;
    int age_bracket = 0;
    int gender = 0;
    std::vector<ScoredTrial> trials;
};

struct AnalysisInput {
    std::vector<ParticipantInput> participants;  // included participants, sorted by id
    study::ExclusionReport exclusions;
};

/// Scores every finished trial of a session. Throws ValidationError when a
/// stimulus is missing from the manifest.
ParticipantInput score_session(const study::SessionState& session, const study::ParticipantProfile& profile,
                               const catalog::Manifest& manifest);

AnalysisInput build_input(const study::StudyState& state, const catalog::Manifest& manifest,
                          const study::ExclusionCriteria& criteria = {});

/// Canonical form; equal inputs serialize to identical bytes.
json input_to_json(const AnalysisInput& input);

struct ProcedureMeasures {
    trial::ProcedureKind procedure = trial::ProcedureKind::TwoAFC;
    sdt::StimulusResponseTable table;
    int trials = 0;
    int responses = 0;
    int correct = 0;
    int nondecisions = 0;
    // Absent when undefined (no responses, empty row, or rates of 0 or 1 without correction).
    std::optional<double> acc;
    std::optional<double> hit;
    std::optional<double> false_alarm;
    std::optional<double> d_prime;
    std::optional<double> criterion;
    std::optional<double> pc_max;
    std::optional<double> hit_loglinear;
    std::optional<double> false_alarm_loglinear;
    std::optional<double> d_prime_loglinear;
    std::optional<double> criterion_loglinear;
    std::optional<double> pc_max_loglinear;

    std::optional<double> d_prime_for(sdt::Correction c) const {
        return c == sdt::Correction::LogLinear ? d_prime_loglinear : d_prime;
    }
    std::optional<double> criterion_for(sdt::Correction c) const {
        return c == sdt::Correction::LogLinear ? criterion_loglinear : criterion;
    }
};

ProcedureMeasures measure_procedure(trial::ProcedureKind procedure, std::span<const ScoredTrial> trials);

struct ParticipantMeasures {
    std::string participant_id;
    std::string session_id;
    study::Experience experience = study::Experience::None;
    std::map<trial::ProcedureKind, ProcedureMeasures> by_procedure;  // procedures present in the session
};

ParticipantMeasures measure_participant(const ParticipantInput& participant);

struct Summary {
    std::size_t n = 0;
    std::optional<double> mean;
    std::optional<double> sd;  // sample standard deviation, n >= 2
    std::optional<double> min;
    std::optional<double> max;
};

Summary summarize(std::span<const double> values);

struct AggregateRow {
    trial::ProcedureKind procedure = trial::ProcedureKind::TwoAFC;
    std::string measure;
    Summary summary;
};

enum class GroupKey { Experience, Confidence, LatencyBin, ManipulationClass };

struct Proportion {
    std::size_t n = 0;
    std::size_t k = 0;
    std::optional<double> value;
    std::optional<double> ci_low;  // 95 % normal approximation, clamped to [0, 1]
    std::optional<double> ci_high;
};

Proportion proportion(std::size_t k, std::size_t n);

struct GroupRow {
    trial::ProcedureKind procedure = trial::ProcedureKind::TwoAFC;
    std::string group;
    std::size_t participants = 0;
    Proportion acc;
    std::optional<Proportion> fpr;  // ManipulationClass only
    std::optional<Proportion> fnr;
};

/// Trial-level pooled rates per (procedure, group) over responded trials.
/// Latency bins are one second wide from 0 to 10 s, then ">=10s".
std::vector<GroupRow> group_by(const AnalysisInput& input, GroupKey key);

struct ThresholdOptions {
    int bins = 8;
    psychometric::BaseFunction base = psychometric::BaseFunction::Logistic;
    double level = 0.75;
};

struct ThresholdSummary {
    std::vector<psychometric::IntensityBin> bins;
    std::optional<psychometric::FitResult> fit;
    std::optional<double> threshold;
    double level = 0.75;
    std::string error;  // set when the fit failed
};

/// Bins responded 2AFC trials by the manipulated image's distance score
/// (equal-width bins over the observed range) and fits Psi with gamma = 0.5.
/// Fit failures are reported in the summary, not thrown.
ThresholdSummary fit_thresholds(const AnalysisInput& input, const ThresholdOptions& options = {});

struct AnalysisOptions {
    sdt::Correction correction = sdt::Correction::LogLinear;
    study::ExclusionCriteria criteria;
    ThresholdOptions thresholds;
    bool fit = true;
};

struct AnalysisReport {
    sdt::Correction correction = sdt::Correction::LogLinear;
    std::vector<ParticipantMeasures> participants;
    std::vector<AggregateRow> aggregates;
    std::map<GroupKey, std::vector<GroupRow>> groups;
    std::optional<ThresholdSummary> thresholds;
    study::ExclusionReport exclusions;
};

AnalysisReport analyze(const AnalysisInput& input, const AnalysisOptions& options = {});

/// Replays the log, applies the exclusion criteria and analyses the included sessions.
AnalysisReport analyze_log(std::span<const study::EventLogEntry> log, const catalog::Manifest& manifest,
                           const AnalysisOptions& options = {});

json measures_to_json(const ProcedureMeasures& m);
json participant_to_json(const ParticipantMeasures& p, sdt::Correction correction);
json report_to_json(const AnalysisReport& report);

/// Writes participants.csv, aggregates.csv, one group_<key>.csv per key,
/// exclusions.csv, thresholds.csv (when fitted) and report.json.
void write_report(const AnalysisReport& report, const std::filesystem::path& out_dir);

std::string to_string(GroupKey key);
GroupKey group_key_from_string(const std::string& s);
sdt::Correction correction_from_string(const std::string& s);
std::string to_string(sdt::Correction c);

/// Shortest decimal that round-trips.
std::string format_double(double v);

}  // namespace facepsy::analysis
