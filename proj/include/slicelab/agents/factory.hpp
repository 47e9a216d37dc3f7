#pragma once

#include <memory>
#include <string>

#include "slicelab/agents/agent.hpp"
#include "slicelab/core/config.hpp"

namespace slicelab::agents {

/// Always requests the same number of PRBs.
class FixedAgent : public Agent {
public:
    FixedAgent(SlicingAction prbs, int num_actions);

    std::string kind() const override { return "fixed"; }
    int num_actions() const override { return num_actions_; }
    SlicingAction act(const Observation&, ActMode, Rng&) const override { return prbs_; }
    rlcore::Checkpoint checkpoint() const override;

    SlicingAction prbs() const { return prbs_; }

private:
    SlicingAction prbs_;
    int num_actions_;
};

/// Learner of kind "ppo", "dqn" or "qtab" with hyperparameters from `cfg`.
std::unique_ptr<Learner> make_learner(const std::string& kind, int num_actions, const Config& cfg,
                                      std::uint64_t seed);

/// Restores any agent from its checkpoint (dispatch on meta "kind").
std::unique_ptr<Agent> load_agent(const rlcore::Checkpoint& ckpt);

}  // namespace slicelab::agents
