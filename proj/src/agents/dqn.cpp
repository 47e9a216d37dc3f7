#include "slicelab/agents/dqn.hpp"

#include <algorithm>
#include <cmath>

#include "slicelab/rlcore/batch_grad.hpp"

namespace slicelab::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw Error("replay buffer capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(const Transition& t, bool terminal) {
    if (items_.size() < capacity_) {
        items_.push_back({t, terminal});
    } else {
        items_[head_] = {t, terminal};
    }
    head_ = (head_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
    if (items_.empty()) throw Error("cannot sample from an empty replay buffer");
    std::vector<std::size_t> idx(batch);
    const int hi = static_cast<int>(items_.size()) - 1;
    for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_int(0, hi));
    return idx;
}

void sync_target(QNetworks& nets) {
    std::copy(nets.online.params().begin(), nets.online.params().end(), nets.target.params().begin());
}

double linear_epsilon(long step, long decay_steps, double start, double end) {
    if (decay_steps <= 0 || step >= decay_steps) return end;
    const double f = static_cast<double>(step) / static_cast<double>(decay_steps);
    return start + f * (end - start);
}

DqnUpdateStats dqn_update(const ReplayBuffer& buffer, QNetworks& nets, double gamma, std::size_t batch,
                          double lr, double huber_delta, Rng& rng,
                          const std::function<std::vector<double>(const Observation&)>& encode) {
    if (buffer.size() < batch)
        throw Error("replay buffer holds " + std::to_string(buffer.size()) + " transitions, batch needs " +
                    std::to_string(batch));
    const auto idx = buffer.sample(batch, rng);
    const auto in_dim = static_cast<std::size_t>(nets.online.input_dim());
    std::vector<double> inputs(batch * in_dim);
    std::vector<double> targets(batch);
    std::vector<int> actions(batch);
    for (std::size_t k = 0; k < batch; ++k) {
        const auto& e = buffer[idx[k]];
        const auto x = encode(e.transition.state);
        std::copy(x.begin(), x.end(), inputs.begin() + k * in_dim);
        actions[k] = index_from_action(e.transition.action);
        double target = e.transition.reward;
        if (!e.terminal && gamma > 0.0) {
            const auto q_next = nets.target.forward(encode(e.transition.next_state));
            target += gamma * *std::max_element(q_next.begin(), q_next.end());
        }
        targets[k] = target;
    }

    const double scale = 1.0 / static_cast<double>(batch);
    std::vector<double> q_taken(batch);
    auto g = rlcore::batch_gradient(nets.online, inputs, batch,
                                    [&](std::size_t k, std::span<const double> q, std::span<double> up) {
                                        const double d = q[actions[k]] - targets[k];
                                        q_taken[k] = q[actions[k]];
                                        const double ad = std::abs(d);
                                        if (ad <= huber_delta) {
                                            up[actions[k]] = d * scale;
                                            return 0.5 * d * d * scale;
                                        }
                                        up[actions[k]] = (d > 0 ? huber_delta : -huber_delta) * scale;
                                        return huber_delta * (ad - 0.5 * huber_delta) * scale;
                                    });
    rlcore::clip_grad_norm(g.grad, 10.0);
    rlcore::adam_step(nets.online.params(), g.grad, nets.opt, rlcore::AdamConfig{lr});

    DqnUpdateStats s;
    s.loss = g.loss;
    for (double q : q_taken) s.mean_q += q * scale;
    return s;
}

DqnAgent::DqnAgent(int num_actions, DqnConfig cfg, std::uint64_t seed)
    : num_actions_(num_actions),
      cfg_(std::move(cfg)),
      rng_(Rng::substream("dqn", seed)),
      buffer_(static_cast<std::size_t>(cfg_.buffer_capacity)),
      norm_(kObsDim) {
    if (num_actions_ < 1) throw Error("DQN agent needs at least one action");
    nets_.online = rlcore::DenseNet::mlp(kObsDim, cfg_.hidden, num_actions_, rlcore::Activation::relu,
                                         rlcore::Activation::identity, rng_, 1.0);
    nets_.target = nets_.online;
    nets_.opt = rlcore::AdamState(nets_.online.num_params());
}

std::vector<double> DqnAgent::encode(const Observation& obs) const {
    const auto raw = obs.to_array();
    if (!cfg_.normalize_obs) return {raw.begin(), raw.end()};
    return norm_.normalize(raw);
}

std::vector<double> DqnAgent::q_values(const Observation& obs) const { return nets_.online.forward(encode(obs)); }

double DqnAgent::epsilon() const {
    const long decay = static_cast<long>(cfg_.eps_decay_fraction * static_cast<double>(budget_));
    return linear_epsilon(steps_, decay, cfg_.eps_start, cfg_.eps_end);
}

SlicingAction DqnAgent::act(const Observation& obs, ActMode mode, Rng& rng) const {
    if (mode == ActMode::sample && rng.uniform() < cfg_.eps_end)
        return action_from_index(rng.uniform_int(0, num_actions_ - 1));
    const auto q = q_values(obs);
    return action_from_index(argmax_lowest(q.data(), num_actions_));
}

SlicingAction DqnAgent::explore(const Observation& obs) {
    if (pending_) throw Error("explore() called twice without observe()");
    if (cfg_.normalize_obs) norm_.update(obs.to_array());
    SlicingAction a;
    if (rng_.uniform() < epsilon()) {
        a = action_from_index(rng_.uniform_int(0, num_actions_ - 1));
    } else {
        const auto q = q_values(obs);
        a = action_from_index(argmax_lowest(q.data(), num_actions_));
    }
    pending_ = true;
    pending_obs_ = obs;
    pending_action_ = a;
    return a;
}

void DqnAgent::observe(double reward, const Observation& next, bool episode_end) {
    if (!pending_) throw Error("observe() without a pending explore()");
    (void)episode_end;  // time limits are not terminal states
    pending_ = false;
    Transition t;
    t.state = pending_obs_;
    t.action = pending_action_;
    t.reward = reward;
    t.next_state = next;
    buffer_.push(t, false);
    ++steps_;

    if (steps_ < cfg_.warmup_steps || buffer_.size() < static_cast<std::size_t>(cfg_.batch)) return;
    if (steps_ % cfg_.train_every != 0) return;
    dqn_update(buffer_, nets_, cfg_.gamma, static_cast<std::size_t>(cfg_.batch), cfg_.lr, cfg_.huber_delta, rng_,
               [this](const Observation& o) { return encode(o); });
    if (++updates_ % cfg_.target_sync == 0) sync_target(nets_);
}

rlcore::Checkpoint DqnAgent::checkpoint() const {
    rlcore::Checkpoint c;
    c.meta = {{"kind", "dqn"},
              {"num_actions", num_actions_},
              {"config",
               {{"gamma", cfg_.gamma},
                {"lr", cfg_.lr},
                {"batch", cfg_.batch},
                {"buffer_capacity", cfg_.buffer_capacity},
                {"target_sync", cfg_.target_sync},
                {"train_every", cfg_.train_every},
                {"warmup_steps", cfg_.warmup_steps},
                {"eps_start", cfg_.eps_start},
                {"eps_end", cfg_.eps_end},
                {"eps_decay_fraction", cfg_.eps_decay_fraction},
                {"huber_delta", cfg_.huber_delta},
                {"hidden", cfg_.hidden},
                {"normalize_obs", cfg_.normalize_obs}}}};
    c.add_net("online", nets_.online);
    c.add_net("target", nets_.target);
    c.add_values("normalizer", norm_.to_flat());
    return c;
}

DqnAgent DqnAgent::from_checkpoint(const rlcore::Checkpoint& ckpt) {
    if (ckpt.meta.value("kind", "") != "dqn") throw Error("checkpoint is not a DQN agent");
    const auto& jc = ckpt.meta.at("config");
    DqnConfig cfg;
    cfg.gamma = jc.at("gamma");
    cfg.lr = jc.at("lr");
    cfg.batch = jc.at("batch");
    cfg.buffer_capacity = jc.at("buffer_capacity");
    cfg.target_sync = jc.at("target_sync");
    cfg.train_every = jc.at("train_every");
    cfg.warmup_steps = jc.at("warmup_steps");
    cfg.eps_start = jc.at("eps_start");
    cfg.eps_end = jc.at("eps_end");
    cfg.eps_decay_fraction = jc.at("eps_decay_fraction");
    cfg.huber_delta = jc.at("huber_delta");
    cfg.hidden = jc.at("hidden").get<std::vector<int>>();
    cfg.normalize_obs = jc.at("normalize_obs");
    DqnAgent agent(ckpt.meta.at("num_actions").get<int>(), cfg, 0);
    agent.nets_.online = ckpt.net("online");
    agent.nets_.target = ckpt.net("target");
    agent.nets_.opt = rlcore::AdamState(agent.nets_.online.num_params());
    agent.norm_ = rlcore::RunningNormalizer::from_flat(ckpt.block("normalizer").values);
    agent.norm_.freeze();
    return agent;
}

}  // namespace slicelab::agents
