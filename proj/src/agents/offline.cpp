#include "slicelab/agents/offline.hpp"

#include <limits>

#include "slicelab/agents/reward.hpp"

namespace slicelab::agents {

OfflineDataset::OfflineDataset(std::vector<Transition> rows, int bins) : rows_(std::move(rows)), bucketer_(bins) {
    if (rows_.empty()) throw Error("offline dataset is empty");
    std::vector<Observation> states;
    states.reserve(rows_.size());
    for (const auto& t : rows_) states.push_back(t.state);
    bucketer_.fit(states);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        buckets_[{bucketer_.key(rows_[i].state), rows_[i].action.prbs}].push_back(i);
        by_action_[rows_[i].action.prbs].push_back(i);
    }
}

std::size_t OfflineDataset::nearest(const Observation& state, SlicingAction action) const {
    auto it = by_action_.find(action.prbs);
    if (it == by_action_.end())
        throw Error("offline dataset has no transition with action " + std::to_string(action.prbs));
    const auto q = state.to_array();
    std::array<double, Observation::kSize> scale{};
    for (std::size_t f = 0; f < Observation::kSize; ++f) {
        const double r = bucketer_.hi()[f] - bucketer_.lo()[f];
        scale[f] = r > 0 ? 1.0 / r : 0.0;
    }
    std::size_t best = it->second.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i : it->second) {
        const auto v = rows_[i].state.to_array();
        double d = 0.0;
        for (std::size_t f = 0; f < Observation::kSize; ++f) {
            const double x = (v[f] - q[f]) * scale[f];
            d += x * x;
        }
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<std::size_t> OfflineDataset::candidates(const Observation& state, SlicingAction action) const {
    auto it = buckets_.find({bucketer_.key(state), action.prbs});
    if (it != buckets_.end()) return it->second;
    return {nearest(state, action)};
}

const Transition& OfflineDataset::sample(const Observation& state, SlicingAction action, Rng& rng) const {
    auto it = buckets_.find({bucketer_.key(state), action.prbs});
    if (it == buckets_.end()) return rows_[nearest(state, action)];
    const auto& idx = it->second;
    return rows_[idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(idx.size()) - 1))]];
}

OfflineEnv::OfflineEnv(const Config& cfg, const std::vector<Transition>& rows, std::uint64_t seed)
    : reward_(cfg.reward),
      capacity_(cfg.sim.capacity),
      num_actions_(max_action(cfg.sim.capacity, cfg.sim.num_slices())),
      episode_len_(cfg.training.episode_len),
      seed_(seed),
      rng_(Rng::substream("offline", seed)) {
    for (int s = 0; s < cfg.sim.num_slices(); ++s) {
        if (!cfg.sim.slices[s].controlled) continue;
        std::vector<Transition> mine;
        for (const auto& t : rows)
            if (t.slice.index == static_cast<std::uint32_t>(s)) mine.push_back(t);
        if (mine.empty()) throw Error("offline dataset has no rows for slice " + std::to_string(s));
        controlled_.push_back(SliceId{static_cast<std::uint32_t>(s)});
        data_.emplace_back(std::move(mine), cfg.qlearning.bins);
    }
}

std::vector<Observation> OfflineEnv::reset(std::int64_t episode) {
    rng_ = Rng::substream("offline", seed_, static_cast<std::uint64_t>(episode));
    current_.clear();
    for (const auto& d : data_) {
        const int i = rng_.uniform_int(0, static_cast<int>(d.size()) - 1);
        current_.push_back(d.rows()[static_cast<std::size_t>(i)].state);
    }
    epoch_ = 0;
    started_ = true;
    return current_;
}

EnvStep OfflineEnv::step(std::span<const SlicingAction> actions) {
    if (!started_) throw Error("environment stepped before reset");
    if (epoch_ >= static_cast<std::uint32_t>(episode_len_)) throw Error("episode already finished");
    if (actions.size() != data_.size())
        throw Error("expected " + std::to_string(data_.size()) + " actions, got " + std::to_string(actions.size()));
    EnvStep out;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (actions[i].prbs < 1 || actions[i].prbs > num_actions_)
            throw Error("action " + std::to_string(actions[i].prbs) + " outside [1, " + std::to_string(num_actions_) + "]");
        const auto& t = data_[i].sample(current_[i], actions[i], rng_);
        current_[i] = t.next_state;
        out.obs.push_back(t.next_state);
        out.applied.push_back(actions[i]);
        out.rewards.push_back(reward(t.next_state.phi_sla, t.next_state.phi_meas, actions[i], capacity_, reward_.k,
                                     reward_.indicator));
    }
    ++epoch_;
    out.done = epoch_ >= static_cast<std::uint32_t>(episode_len_);
    return out;
}

}  // namespace slicelab::agents
