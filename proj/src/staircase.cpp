#include "facepsy/staircase.hpp"

#include <algorithm>

#include "facepsy/error.hpp"

namespace facepsy::schedule {

Staircase::Staircase(StaircaseConfig config) : config_(std::move(config)), rng_(config_.seed) {
    std::vector<std::string> problems;
    if (config_.levels.size() < 2) problems.emplace_back("staircase needs at least 2 intensity levels");
    if (!std::is_sorted(config_.levels.begin(), config_.levels.end()) ||
        std::adjacent_find(config_.levels.begin(), config_.levels.end()) != config_.levels.end()) {
        problems.emplace_back("intensity levels must be strictly increasing");
    }
    if (config_.start_index >= config_.levels.size()) problems.emplace_back("start level out of range");
    const auto& r = config_.rule;
    if (r.min_step < 1 || r.initial_step < r.min_step) problems.emplace_back("require 1 <= min_step <= initial_step");
    if (r.down_after < 1) problems.emplace_back("down_after must be at least 1");
    if (r.final_reversals < 0) problems.emplace_back("final_reversals must be non-negative");
    if (config_.max_trials < 1) problems.emplace_back("max_trials must be positive");
    if (config_.procedure == trial::ProcedureKind::ABX) problems.emplace_back("staircases support Yes/No and 2AFC only");
    if (config_.procedure == trial::ProcedureKind::TwoAFC && config_.foils.empty()) {
        problems.emplace_back("2AFC staircases need bona fide foils");
    }
    if (!config_.stimuli_per_level.empty() && config_.stimuli_per_level.size() != config_.levels.size()) {
        problems.emplace_back("stimuli_per_level must have one entry per level");
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    level_ = config_.start_index;
    step_ = r.initial_step;
}

std::optional<trial::TrialSpec> Staircase::next_trial() {
    if (finished_) return std::nullopt;
    if (pending_) return pending_;

    trial::TrialSpec t;
    t.trial_id = next_id_++;
    t.procedure = config_.procedure;
    t.intensity = config_.levels[level_];
    t.target_manipulated = true;
    t.timeouts = config_.timeouts.value_or(trial::PhaseTimeouts::defaults(config_.procedure));
    if (!config_.stimuli_per_level.empty() && !config_.stimuli_per_level[level_].empty()) {
        const auto& pool = config_.stimuli_per_level[level_];
        t.target_stimulus = pool[rng_.index(pool.size())];
    } else {
        t.target_stimulus = "level-" + std::to_string(level_);
    }
    if (config_.procedure == trial::ProcedureKind::TwoAFC) {
        t.reference_stimuli = {config_.foils[rng_.index(config_.foils.size())]};
        t.spatial_order = rng_.index(2) == 0 ? trial::SpatialOrder::SignalNoise : trial::SpatialOrder::NoiseSignal;
    }
    pending_ = t;
    return pending_;
}

void Staircase::record(std::uint32_t trial_id, trial::Outcome outcome) {
    if (!pending_ || pending_->trial_id != trial_id) {
        throw StateError("staircase: no pending trial " + std::to_string(trial_id));
    }
    pending_.reset();
    history_.push_back(level_);
    ++completed_;

    const bool positive = outcome == trial::Outcome::Correct;
    const int harder = config_.rule.direction == StaircaseDirection::CorrectMakesHarder ? -1 : 1;
    if (positive) {
        if (++correct_run_ >= config_.rule.down_after) {
            correct_run_ = 0;
            move(harder);
        }
    } else {
        correct_run_ = 0;
        move(-harder);
    }

    if (completed_ >= config_.max_trials) finished_ = true;
    if (config_.rule.final_reversals > 0 && final_reversals_seen_ >= config_.rule.final_reversals) finished_ = true;
}

void Staircase::move(int direction) {
    if (last_direction_ != 0 && direction != last_direction_) {
        ++reversals_;
        if (step_ == config_.rule.min_step) {
            ++final_reversals_seen_;
        } else {
            step_ = std::max(config_.rule.min_step, step_ / 2);
        }
    }
    last_direction_ = direction;
    const auto top = static_cast<long>(config_.levels.size()) - 1;
    const long next = std::clamp(static_cast<long>(level_) + direction * step_, 0L, top);
    level_ = static_cast<std::size_t>(next);
}

}  // namespace facepsy::schedule
