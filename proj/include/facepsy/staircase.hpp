#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "facepsy/rng.hpp"
#include "facepsy/trial.hpp"

namespace facepsy::schedule {

/// Intensity levels are sorted ascending; a lower level is a harder stimulus.
enum class StaircaseDirection {
    CorrectMakesHarder,  // converges on the threshold
    CorrectMakesEasier,  // literal "positive response increases the stimulus"
};

struct StepRule {
    int initial_step = 4;  // in levels
    int min_step = 1;
    int down_after = 1;    // consecutive correct responses before a harder step
    // Reversals tolerated once the step has reached min_step; 0 runs to max_trials.
    int final_reversals = 1;
    StaircaseDirection direction = StaircaseDirection::CorrectMakesHarder;
};

struct StaircaseConfig {
    std::vector<double> levels;
    std::size_t start_index = 0;
    StepRule rule;
    int max_trials = 60;
    std::uint64_t seed = 0;
    trial::ProcedureKind procedure = trial::ProcedureKind::YesNo;  // YesNo or TwoAFC
    // Optional stimulus ids per level; "level-<i>" placeholders otherwise.
    std::vector<std::vector<std::string>> stimuli_per_level;
    // Bona fide partners for 2AFC staircases.
    std::vector<std::string> foils;
    std::optional<trial::PhaseTimeouts> timeouts;
};

/// Incremental scheduler: one pending trial at a time; the step halves on
/// every reversal until it reaches min_step.
class Staircase {
public:
    explicit Staircase(StaircaseConfig config);

    /// The pending trial, issuing a new one if none is pending; nullopt once finished.
    std::optional<trial::TrialSpec> next_trial();

    /// Throws StateError for a trial that was not issued or is already answered.
    void record(std::uint32_t trial_id, trial::Outcome outcome);

    bool finished() const { return finished_; }
    std::size_t level_index() const { return level_; }
    double intensity() const { return config_.levels[level_]; }
    int step() const { return step_; }
    int reversals() const { return reversals_; }
    int trials_completed() const { return completed_; }
    /// Level index presented on each completed trial.
    const std::vector<std::size_t>& history() const { return history_; }

private:
    void move(int direction);

    StaircaseConfig config_;
    Rng rng_;
    std::size_t level_;
    int step_;
    int reversals_ = 0;
    int final_reversals_seen_ = 0;
    int last_direction_ = 0;
    int correct_run_ = 0;
    int completed_ = 0;
    bool finished_ = false;
    std::optional<trial::TrialSpec> pending_;
    std::uint32_t next_id_ = 1;
    std::vector<std::size_t> history_;
};

}  // namespace facepsy::schedule
