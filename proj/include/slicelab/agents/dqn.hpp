#pragma once

#include <functional>
#include <vector>

#include "slicelab/agents/agent.hpp"
#include "slicelab/core/config.hpp"
#include "slicelab/rlcore/dense_net.hpp"
#include "slicelab/rlcore/optim.hpp"

namespace slicelab::agents {

struct Experience {
    Transition transition;
    bool terminal = false;
};

/// Fixed-capacity ring buffer with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition& t, bool terminal = false);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Experience& operator[](std::size_t i) const { return items_.at(i); }

    /// `batch` indices drawn uniformly with replacement.
    std::vector<std::size_t> sample(std::size_t batch, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Experience> items_;
};

/// Online and target Q-networks plus optimiser state. Inputs are built by
/// `encode` (normalisation happens there).
struct QNetworks {
    rlcore::DenseNet online;
    rlcore::DenseNet target;
    rlcore::AdamState opt;
};

struct DqnUpdateStats {
    double loss = 0.0;
    double mean_q = 0.0;
};

/// One gradient step on a uniformly sampled minibatch with targets
/// r + gamma * max_a' Q_target(s', a') (no bootstrap for terminal steps) and
/// Huber loss. Throws Error when the buffer holds fewer than `batch` items.
DqnUpdateStats dqn_update(const ReplayBuffer& buffer, QNetworks& nets, double gamma, std::size_t batch,
                          double lr, double huber_delta, Rng& rng,
                          const std::function<std::vector<double>(const Observation&)>& encode);

/// Copies online parameters into the target network.
void sync_target(QNetworks& nets);

/// Linear epsilon schedule from `start` to `end` over `decay_steps`.
double linear_epsilon(long step, long decay_steps, double start, double end);

class DqnAgent : public Learner {
public:
    static constexpr int kObsDim = static_cast<int>(Observation::kSize);

    DqnAgent(int num_actions, DqnConfig cfg, std::uint64_t seed);
    static DqnAgent from_checkpoint(const rlcore::Checkpoint& ckpt);

    std::string kind() const override { return "dqn"; }
    int num_actions() const override { return num_actions_; }
    SlicingAction act(const Observation& obs, ActMode mode, Rng& rng) const override;
    rlcore::Checkpoint checkpoint() const override;

    SlicingAction explore(const Observation& obs) override;
    void observe(double reward, const Observation& next, bool episode_end) override;
    void set_step_budget(long steps) override { budget_ = steps; }

    std::vector<double> q_values(const Observation& obs) const;
    double epsilon() const;
    long updates() const { return updates_; }

    const QNetworks& nets() const { return nets_; }
    const ReplayBuffer& buffer() const { return buffer_; }

private:
    std::vector<double> encode(const Observation& obs) const;

    int num_actions_;
    DqnConfig cfg_;
    Rng rng_;
    QNetworks nets_;
    ReplayBuffer buffer_;
    rlcore::RunningNormalizer norm_;
    long steps_ = 0;
    long updates_ = 0;
    long budget_ = 100000;
    bool pending_ = false;
    Observation pending_obs_;
    SlicingAction pending_action_;
};

}  // namespace slicelab::agents
