#include "slicelab/agents/factory.hpp"

#include "slicelab/agents/dqn.hpp"
#include "slicelab/agents/ppo.hpp"
#include "slicelab/agents/qlearning.hpp"

namespace slicelab::agents {

FixedAgent::FixedAgent(SlicingAction prbs, int num_actions) : prbs_(prbs), num_actions_(num_actions) {
    if (prbs_.prbs < 1 || prbs_.prbs > num_actions_)
        throw Error("fixed action " + std::to_string(prbs_.prbs) + " outside [1, " + std::to_string(num_actions_) +
                    "]");
}

rlcore::Checkpoint FixedAgent::checkpoint() const {
    rlcore::Checkpoint c;
    c.meta = {{"kind", "fixed"}, {"num_actions", num_actions_}, {"prbs", prbs_.prbs}};
    return c;
}

std::unique_ptr<Learner> make_learner(const std::string& kind, int num_actions, const Config& cfg,
                                      std::uint64_t seed) {
    if (kind == "ppo") return std::make_unique<PpoAgent>(num_actions, cfg.ppo, seed);
    if (kind == "dqn") return std::make_unique<DqnAgent>(num_actions, cfg.dqn, seed);
    if (kind == "qtab") {
        if (cfg.training.episodes < cfg.qlearning.bin_fit_episodes)
            throw Error("qtab needs at least bin_fit_episodes (" + std::to_string(cfg.qlearning.bin_fit_episodes) +
                        ") training episodes, got " + std::to_string(cfg.training.episodes));
        return std::make_unique<QLearningAgent>(num_actions, cfg.qlearning, seed);
    }
    throw Error("unknown agent kind '" + kind + "' (expected ppo, dqn or qtab)");
}

std::unique_ptr<Agent> load_agent(const rlcore::Checkpoint& ckpt) {
    const std::string kind = ckpt.meta.value("kind", "");
    if (kind == "ppo") return std::make_unique<PpoAgent>(PpoAgent::from_checkpoint(ckpt));
    if (kind == "dqn") return std::make_unique<DqnAgent>(DqnAgent::from_checkpoint(ckpt));
    if (kind == "qtab") return std::make_unique<QLearningAgent>(QLearningAgent::from_checkpoint(ckpt));
    if (kind == "fixed")
        return std::make_unique<FixedAgent>(SlicingAction{ckpt.meta.at("prbs").get<int>()},
                                            ckpt.meta.at("num_actions").get<int>());
    throw Error("checkpoint has unknown agent kind '" + kind + "'");
}

}  // namespace slicelab::agents
