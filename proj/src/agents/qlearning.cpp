#include "slicelab/agents/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "slicelab/agents/dqn.hpp"

namespace slicelab::agents {

StateBucketer::StateBucketer(int bins) : bins_(bins) {
    if (bins_ < 1 || bins_ > 64) throw Error("bins per feature must be in [1, 64]");
}

void StateBucketer::fit(std::span<const Observation> states) {
    if (states.empty()) throw Error("cannot fit bins on an empty state set");
    lo_.fill(std::numeric_limits<double>::infinity());
    hi_.fill(-std::numeric_limits<double>::infinity());
    for (const auto& s : states) {
        const auto v = s.to_array();
        for (std::size_t f = 0; f < Observation::kSize; ++f) {
            lo_[f] = std::min(lo_[f], v[f]);
            hi_[f] = std::max(hi_[f], v[f]);
        }
    }
    fitted_ = true;
}

int StateBucketer::bin(std::size_t feature, double value) const {
    if (!fitted_) throw Error("state bins used before fitting");
    const double lo = lo_[feature], hi = hi_[feature];
    if (!(hi > lo)) return 0;
    const double u = (value - lo) / (hi - lo);
    const int b = static_cast<int>(std::floor(u * bins_));
    return std::clamp(b, 0, bins_ - 1);
}

StateBucketer::Key StateBucketer::key(const Observation& obs) const {
    const auto v = obs.to_array();
    Key k = 0;
    for (std::size_t f = 0; f < Observation::kSize; ++f) k = k * static_cast<Key>(bins_) + static_cast<Key>(bin(f, v[f]));
    return k;
}

std::vector<double> StateBucketer::to_flat() const {
    std::vector<double> out{static_cast<double>(bins_)};
    out.insert(out.end(), lo_.begin(), lo_.end());
    out.insert(out.end(), hi_.begin(), hi_.end());
    return out;
}

StateBucketer StateBucketer::from_flat(std::span<const double> flat) {
    if (flat.size() != 1 + 2 * Observation::kSize) throw Error("bad bucketer state size");
    StateBucketer b(static_cast<int>(flat[0]));
    std::copy_n(flat.begin() + 1, Observation::kSize, b.lo_.begin());
    std::copy_n(flat.begin() + 1 + Observation::kSize, Observation::kSize, b.hi_.begin());
    b.fitted_ = true;
    return b;
}

QTable::QTable(int num_actions, StateBucketer bucketer) : num_actions_(num_actions), bucketer_(std::move(bucketer)) {
    if (num_actions_ < 1) throw Error("Q-table needs at least one action");
}

double QTable::get(const Observation& s, SlicingAction a) const {
    const int i = index_from_action(a);
    if (i < 0 || i >= num_actions_) throw Error("action out of range for Q-table");
    auto it = table_.find(bucketer_.key(s));
    return it == table_.end() ? 0.0 : it->second[static_cast<std::size_t>(i)];
}

void QTable::set(const Observation& s, SlicingAction a, double v) {
    const int i = index_from_action(a);
    if (i < 0 || i >= num_actions_) throw Error("action out of range for Q-table");
    auto& r = table_[bucketer_.key(s)];
    if (r.empty()) r.assign(static_cast<std::size_t>(num_actions_), 0.0);
    r[static_cast<std::size_t>(i)] = v;
}

std::vector<double> QTable::row(const Observation& s) const {
    auto it = table_.find(bucketer_.key(s));
    if (it == table_.end()) return std::vector<double>(static_cast<std::size_t>(num_actions_), 0.0);
    return it->second;
}

double QTable::max_value(const Observation& s) const {
    const auto r = row(s);
    return *std::max_element(r.begin(), r.end());
}

// [key, q...] per state, keys ascending so the output is order-stable.
std::vector<double> QTable::to_flat() const {
    std::map<StateBucketer::Key, const std::vector<double>*> sorted;
    for (const auto& [k, v] : table_) sorted.emplace(k, &v);
    std::vector<double> out;
    out.reserve(sorted.size() * static_cast<std::size_t>(num_actions_ + 1));
    for (const auto& [k, v] : sorted) {
        out.push_back(static_cast<double>(k));
        out.insert(out.end(), v->begin(), v->end());
    }
    return out;
}

void QTable::load_flat(std::span<const double> flat) {
    const auto stride = static_cast<std::size_t>(num_actions_ + 1);
    if (flat.size() % stride != 0) throw Error("bad Q-table state size");
    table_.clear();
    for (std::size_t i = 0; i < flat.size(); i += stride)
        table_[static_cast<StateBucketer::Key>(flat[i])].assign(flat.begin() + i + 1, flat.begin() + i + stride);
}

void qlearning_update(QTable& table, const Transition& t, double alpha, double gamma) {
    const double q = table.get(t.state, t.action);
    const double target = t.reward + gamma * table.max_value(t.next_state);
    table.set(t.state, t.action, q + alpha * (target - q));
}

QLearningAgent::QLearningAgent(int num_actions, QLearningConfig cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(Rng::substream("qtab", seed)), table_(num_actions, StateBucketer(cfg.bins)) {}

double QLearningAgent::epsilon() const {
    const long decay = static_cast<long>(cfg_.eps_decay_fraction * static_cast<double>(budget_));
    return linear_epsilon(steps_, decay, cfg_.eps_start, cfg_.eps_end);
}

SlicingAction QLearningAgent::act(const Observation& obs, ActMode mode, Rng& rng) const {
    const int n = table_.num_actions();
    if (!table_.bucketer().fitted()) return action_from_index(mode == ActMode::sample ? rng.uniform_int(0, n - 1) : 0);
    if (mode == ActMode::sample && rng.uniform() < cfg_.eps_end) return action_from_index(rng.uniform_int(0, n - 1));
    const auto r = table_.row(obs);
    return action_from_index(argmax_lowest(r.data(), n));
}

SlicingAction QLearningAgent::explore(const Observation& obs) {
    if (pending_) throw Error("explore() called twice without observe()");
    const int n = table_.num_actions();
    SlicingAction a;
    if (!table_.bucketer().fitted() || rng_.uniform() < epsilon()) {
        a = action_from_index(rng_.uniform_int(0, n - 1));
    } else {
        const auto r = table_.row(obs);
        a = action_from_index(argmax_lowest(r.data(), n));
    }
    pending_ = true;
    pending_obs_ = obs;
    pending_action_ = a;
    return a;
}

void QLearningAgent::observe(double reward, const Observation& next, bool episode_end) {
    if (!pending_) throw Error("observe() without a pending explore()");
    pending_ = false;
    ++steps_;
    Transition t;
    t.state = pending_obs_;
    t.action = pending_action_;
    t.reward = reward;
    t.next_state = next;
    if (table_.bucketer().fitted()) {
        qlearning_update(table_, t, cfg_.alpha, cfg_.gamma);
    } else {
        warmup_.push_back(t);
    }
    if (episode_end && ++episodes_ >= cfg_.bin_fit_episodes && !table_.bucketer().fitted()) fit_and_replay();
}

void QLearningAgent::fit_and_replay() {
    std::vector<Observation> states;
    states.reserve(2 * warmup_.size());
    for (const auto& t : warmup_) {
        states.push_back(t.state);
        states.push_back(t.next_state);
    }
    table_.bucketer().fit(states);
    for (const auto& t : warmup_) qlearning_update(table_, t, cfg_.alpha, cfg_.gamma);
    warmup_.clear();
    warmup_.shrink_to_fit();
}

rlcore::Checkpoint QLearningAgent::checkpoint() const {
    if (!table_.bucketer().fitted()) throw Error("Q-learning agent has not fitted its bins yet");
    rlcore::Checkpoint c;
    c.meta = {{"kind", "qtab"},
              {"num_actions", table_.num_actions()},
              {"config",
               {{"alpha", cfg_.alpha},
                {"gamma", cfg_.gamma},
                {"bins", cfg_.bins},
                {"bin_fit_episodes", cfg_.bin_fit_episodes},
                {"eps_start", cfg_.eps_start},
                {"eps_end", cfg_.eps_end},
                {"eps_decay_fraction", cfg_.eps_decay_fraction}}}};
    c.add_values("bins", table_.bucketer().to_flat());
    c.add_values("table", table_.to_flat());
    return c;
}

QLearningAgent QLearningAgent::from_checkpoint(const rlcore::Checkpoint& ckpt) {
    if (ckpt.meta.value("kind", "") != "qtab") throw Error("checkpoint is not a Q-learning agent");
    const auto& jc = ckpt.meta.at("config");
    QLearningConfig cfg;
    cfg.alpha = jc.at("alpha");
    cfg.gamma = jc.at("gamma");
    cfg.bins = jc.at("bins");
    cfg.bin_fit_episodes = jc.at("bin_fit_episodes");
    cfg.eps_start = jc.at("eps_start");
    cfg.eps_end = jc.at("eps_end");
    cfg.eps_decay_fraction = jc.at("eps_decay_fraction");
    QLearningAgent agent(ckpt.meta.at("num_actions").get<int>(), cfg, 0);
    agent.table_.bucketer() = StateBucketer::from_flat(ckpt.block("bins").values);
    agent.table_.load_flat(ckpt.block("table").values);
    return agent;
}

}  // namespace slicelab::agents
