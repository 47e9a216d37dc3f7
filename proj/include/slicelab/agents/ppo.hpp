#pragma once

#include <span>
#include <vector>

#include "slicelab/agents/agent.hpp"
#include "slicelab/core/config.hpp"
#include "slicelab/rlcore/dense_net.hpp"
#include "slicelab/rlcore/optim.hpp"

namespace slicelab::agents {

/// One behaviour-policy step as stored for a PPO update.
struct PpoStep {
    std::vector<double> obs;  // network input (already normalised)
    int action = 0;           // action-set index
    double reward = 0.0;
    double value = 0.0;       // critic estimate at collection time
    double log_prob = 0.0;    // behaviour log-probability of `action`
    bool episode_end = false;
    double bootstrap_value = 0.0;  // V(next state), used when episode_end
};

struct Advantages {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// Generalised advantage estimation. `next_values[t]` is V(s_{t+1});
/// `cut[t]` stops the recursion after step t (episode boundary).
Advantages compute_gae(std::span<const double> rewards, std::span<const double> values,
                       std::span<const double> next_values, std::span<const bool> cut, double gamma,
                       double lambda);

/// Clipped-surrogate loss of one sample and its gradient w.r.t. the logits:
///   -min(rho*A, clip(rho, 1-eps, 1+eps)*A) - entropy_coef * H(pi)
struct SurrogateSample {
    double loss = 0.0;
    double ratio = 1.0;
    double entropy = 0.0;
    bool clipped = false;
    std::vector<double> dlogits;
};

SurrogateSample ppo_surrogate(std::span<const double> logits, int action, double old_log_prob, double advantage,
                              double clip, double entropy_coef);

/// Numerically stable log-softmax.
std::vector<double> log_softmax(std::span<const double> logits);

struct PpoUpdateStats {
    double actor_loss = 0.0;
    double critic_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    /// pi_new(a|s) / pi_old(a|s) over the batch after the update.
    std::vector<double> post_ratios;
};

/// Actor/critic pair with their optimiser state.
struct ActorCritic {
    rlcore::DenseNet actor;   // logits
    rlcore::DenseNet critic;  // scalar value
    rlcore::AdamState actor_opt;
    rlcore::AdamState critic_opt;
};

/// One PPO update over `steps`: GAE advantages normalised over the batch,
/// then `update_epochs` passes of shuffled minibatches, each taking one Adam
/// step on the clipped surrogate (actor) and on the squared return error
/// (critic). Throws Error for an empty batch or non-finite advantages.
PpoUpdateStats ppo_update(ActorCritic& model, const std::vector<PpoStep>& steps, const PpoConfig& cfg, Rng& rng);

class PpoAgent : public Learner {
public:
    static constexpr int kObsDim = static_cast<int>(Observation::kSize);

    PpoAgent(int num_actions, PpoConfig cfg, std::uint64_t seed);
    /// Restores a trained agent; the normalizer comes back frozen.
    static PpoAgent from_checkpoint(const rlcore::Checkpoint& ckpt);

    std::string kind() const override { return "ppo"; }
    int num_actions() const override { return num_actions_; }
    SlicingAction act(const Observation& obs, ActMode mode, Rng& rng) const override;
    rlcore::Checkpoint checkpoint() const override;

    SlicingAction explore(const Observation& obs) override;
    void observe(double reward, const Observation& next, bool episode_end) override;

    std::vector<double> action_probs(const Observation& obs) const;
    double value(const Observation& obs) const;

    const ActorCritic& model() const { return model_; }
    ActorCritic& model() { return model_; }
    const rlcore::RunningNormalizer& normalizer() const { return norm_; }
    const std::vector<PpoUpdateStats>& history() const { return history_; }

private:
    std::vector<double> input(const Observation& obs) const;

    int num_actions_;
    PpoConfig cfg_;
    Rng rng_;
    ActorCritic model_;
    rlcore::RunningNormalizer norm_;
    std::vector<PpoStep> buffer_;
    bool pending_ = false;
    int episodes_in_buffer_ = 0;
    std::vector<PpoUpdateStats> history_;
};

}  // namespace slicelab::agents
