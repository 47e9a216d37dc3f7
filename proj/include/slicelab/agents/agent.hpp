#pragma once

#include <string>

#include "slicelab/core/rng.hpp"
#include "slicelab/core/types.hpp"
#include "slicelab/rlcore/checkpoint.hpp"

namespace slicelab::agents {

enum class ActMode { sample, greedy };

/// Maps an action-set index to a PRB count; index 0 is one PRB.
constexpr SlicingAction action_from_index(int i) { return SlicingAction{i + 1}; }
constexpr int index_from_action(SlicingAction a) { return a.prbs - 1; }

/// Index of the largest value; ties go to the lowest index, i.e. the
/// smallest PRB count.
int argmax_lowest(const double* values, int n);

/// A control policy over the action set {1, ..., num_actions()} PRBs.
class Agent {
public:
    virtual ~Agent() = default;

    virtual std::string kind() const = 0;
    virtual int num_actions() const = 0;
    virtual SlicingAction act(const Observation& obs, ActMode mode, Rng& rng) const = 0;
    virtual rlcore::Checkpoint checkpoint() const = 0;
};

/// An agent that also learns from its own behaviour.
class Learner : public Agent {
public:
    /// Behaviour-policy action; the learner remembers the pending step.
    virtual SlicingAction explore(const Observation& obs) = 0;
    /// Outcome of the last explore() call. `episode_end` marks a time-limit
    /// cut, not a terminal state.
    virtual void observe(double reward, const Observation& next, bool episode_end) = 0;
    /// Total number of environment steps planned; drives exploration schedules.
    virtual void set_step_budget(long steps) { (void)steps; }
};

}  // namespace slicelab::agents
