#pragma once

#include <map>
#include <unordered_map>
#include <vector>

#include "slicelab/agents/env.hpp"
#include "slicelab/agents/qlearning.hpp"

namespace slicelab::agents {

/// Transitions indexed by (bucketed state, action) for conditional sampling
/// of next states.
class OfflineDataset {
public:
    OfflineDataset(std::vector<Transition> rows, int bins = 8);

    /// Uniform draw over rows whose state shares the bucket of `state` and
    /// whose action equals `action`. With no such row, the same-action row
    /// whose state is nearest under range-normalised Euclidean distance
    /// (ties to the earliest row). Throws Error when no row has `action`.
    const Transition& sample(const Observation& state, SlicingAction action, Rng& rng) const;

    /// Indices of the rows `sample` draws from for (state, action).
    std::vector<std::size_t> candidates(const Observation& state, SlicingAction action) const;

    const std::vector<Transition>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    const StateBucketer& bucketer() const { return bucketer_; }
    bool has_action(SlicingAction a) const { return by_action_.count(a.prbs) != 0; }

private:
    std::size_t nearest(const Observation& state, SlicingAction action) const;

    std::vector<Transition> rows_;
    StateBucketer bucketer_;
    std::map<std::pair<StateBucketer::Key, int>, std::vector<std::size_t>> buckets_;
    std::unordered_map<int, std::vector<std::size_t>> by_action_;
};

/// Training environment that replays a recorded dataset: each step draws the
/// next state of every controlled slice conditionally on its current state
/// and the chosen action. Rewards are recomputed from the sampled next state
/// with the configured reward settings. Episodes start from a uniformly drawn
/// recorded state of each slice.
class OfflineEnv : public TrainingEnv {
public:
    OfflineEnv(const Config& cfg, const std::vector<Transition>& rows, std::uint64_t seed);

    std::vector<Observation> reset(std::int64_t episode) override;
    EnvStep step(std::span<const SlicingAction> actions) override;

    std::size_t num_agents() const override { return controlled_.size(); }
    int num_actions() const override { return num_actions_; }
    int episode_len() const override { return episode_len_; }
    std::uint32_t epoch() const override { return epoch_; }
    const std::vector<SliceId>& controlled() const override { return controlled_; }

    const OfflineDataset& dataset(std::size_t agent) const { return data_.at(agent); }

private:
    RewardConfig reward_;
    int capacity_;
    int num_actions_;
    int episode_len_;
    std::uint64_t seed_;
    std::vector<SliceId> controlled_;
    std::vector<OfflineDataset> data_;
    std::vector<Observation> current_;
    Rng rng_;
    std::uint32_t epoch_ = 0;
    bool started_ = false;
};

}  // namespace slicelab::agents
