#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "slicelab/agents/agent.hpp"
#include "slicelab/core/config.hpp"

namespace slicelab::agents {

/// Uniform per-feature bins over a fitted [min, max] range. Values outside
/// the range fall into the edge bins; constant features map to bin 0.
class StateBucketer {
public:
    using Key = std::uint64_t;

    explicit StateBucketer(int bins = 8);

    void fit(std::span<const Observation> states);
    bool fitted() const { return fitted_; }
    int bins() const { return bins_; }

    int bin(std::size_t feature, double value) const;
    Key key(const Observation& obs) const;

    const std::array<double, Observation::kSize>& lo() const { return lo_; }
    const std::array<double, Observation::kSize>& hi() const { return hi_; }

    /// [bins, lo..., hi...]
    std::vector<double> to_flat() const;
    static StateBucketer from_flat(std::span<const double> flat);

private:
    int bins_;
    bool fitted_ = false;
    std::array<double, Observation::kSize> lo_{};
    std::array<double, Observation::kSize> hi_{};
};

/// Action values over discretised states; entries never written read as 0.
class QTable {
public:
    QTable(int num_actions, StateBucketer bucketer);

    int num_actions() const { return num_actions_; }
    const StateBucketer& bucketer() const { return bucketer_; }
    StateBucketer& bucketer() { return bucketer_; }

    double get(const Observation& s, SlicingAction a) const;
    void set(const Observation& s, SlicingAction a, double v);
    std::vector<double> row(const Observation& s) const;
    double max_value(const Observation& s) const;
    std::size_t num_states() const { return table_.size(); }

    std::vector<double> to_flat() const;
    void load_flat(std::span<const double> flat);

private:
    int num_actions_;
    StateBucketer bucketer_;
    std::unordered_map<StateBucketer::Key, std::vector<double>> table_;
};

/// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
void qlearning_update(QTable& table, const Transition& t, double alpha, double gamma);

/// Tabular baseline. The first `bin_fit_episodes` episodes act uniformly at
/// random while collecting states; bins are then fitted and the collected
/// transitions replayed once before epsilon-greedy learning continues.
class QLearningAgent : public Learner {
public:
    QLearningAgent(int num_actions, QLearningConfig cfg, std::uint64_t seed);
    static QLearningAgent from_checkpoint(const rlcore::Checkpoint& ckpt);

    std::string kind() const override { return "qtab"; }
    int num_actions() const override { return table_.num_actions(); }
    SlicingAction act(const Observation& obs, ActMode mode, Rng& rng) const override;
    rlcore::Checkpoint checkpoint() const override;

    SlicingAction explore(const Observation& obs) override;
    void observe(double reward, const Observation& next, bool episode_end) override;
    void set_step_budget(long steps) override { budget_ = steps; }

    const QTable& table() const { return table_; }
    double epsilon() const;

private:
    void fit_and_replay();

    QLearningConfig cfg_;
    Rng rng_;
    QTable table_;
    std::vector<Transition> warmup_;
    long steps_ = 0;
    long budget_ = 100000;
    int episodes_ = 0;
    bool pending_ = false;
    Observation pending_obs_;
    SlicingAction pending_action_;
};

}  // namespace slicelab::agents
