#include "slicelab/agents/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slicelab/rlcore/batch_grad.hpp"

namespace slicelab::agents {

namespace {

int sample_categorical(std::span<const double> probs, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

nlohmann::json ppo_config_json(const PpoConfig& c) {
    return {{"clip", c.clip},
            {"gamma", c.gamma},
            {"gae_lambda", c.gae_lambda},
            {"update_epochs", c.update_epochs},
            {"minibatch", c.minibatch},
            {"episodes_per_update", c.episodes_per_update},
            {"entropy_coef", c.entropy_coef},
            {"value_coef", c.value_coef},
            {"lr", c.lr},
            {"max_grad_norm", c.max_grad_norm},
            {"hidden", c.hidden},
            {"normalize_obs", c.normalize_obs}};
}

}  // namespace

std::vector<double> log_softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - m);
    const double lz = m + std::log(z);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lz;
    return out;
}

Advantages compute_gae(std::span<const double> rewards, std::span<const double> values,
                       std::span<const double> next_values, std::span<const bool> cut, double gamma,
                       double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n || next_values.size() != n || cut.size() != n)
        throw Error("GAE inputs must have equal length");
    Advantages out{std::vector<double>(n), std::vector<double>(n)};
    double gae = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        const double delta = rewards[t] + gamma * next_values[t] - values[t];
        gae = delta + (cut[t] ? 0.0 : gamma * lambda * gae);
        out.advantages[t] = gae;
        out.returns[t] = gae + values[t];
    }
    return out;
}

SurrogateSample ppo_surrogate(std::span<const double> logits, int action, double old_log_prob, double advantage,
                              double clip, double entropy_coef) {
    const auto logp = log_softmax(logits);
    const std::size_t n = logits.size();
    SurrogateSample s;
    s.dlogits.assign(n, 0.0);
    s.ratio = std::exp(logp[action] - old_log_prob);
    const double clipped_ratio = std::clamp(s.ratio, 1.0 - clip, 1.0 + clip);
    const double surr = std::min(s.ratio * advantage, clipped_ratio * advantage);

    for (std::size_t j = 0; j < n; ++j) s.entropy -= std::exp(logp[j]) * logp[j];
    s.loss = -surr - entropy_coef * s.entropy;

    s.clipped = (advantage > 0.0 && s.ratio > 1.0 + clip) || (advantage < 0.0 && s.ratio < 1.0 - clip);
    for (std::size_t j = 0; j < n; ++j) {
        const double p = std::exp(logp[j]);
        if (!s.clipped) {
            const double onehot = static_cast<int>(j) == action ? 1.0 : 0.0;
            s.dlogits[j] = -advantage * s.ratio * (onehot - p);
        }
        s.dlogits[j] += entropy_coef * p * (logp[j] + s.entropy);
    }
    return s;
}

PpoUpdateStats ppo_update(ActorCritic& model, const std::vector<PpoStep>& steps, const PpoConfig& cfg, Rng& rng) {
    const std::size_t n = steps.size();
    if (n == 0) throw Error("PPO update needs at least one step");
    const std::size_t in_dim = steps.front().obs.size();

    std::vector<double> rewards(n), values(n), next_values(n);
    std::vector<bool> cut_vec(n);
    for (std::size_t t = 0; t < n; ++t) {
        rewards[t] = steps[t].reward;
        values[t] = steps[t].value;
        const bool last = t + 1 == n;
        cut_vec[t] = steps[t].episode_end || last;
        next_values[t] = cut_vec[t] ? steps[t].bootstrap_value : steps[t + 1].value;
    }
    const std::unique_ptr<bool[]> cut(new bool[n]);
    for (std::size_t t = 0; t < n; ++t) cut[t] = cut_vec[t];
    auto adv = compute_gae(rewards, values, next_values, std::span<const bool>(cut.get(), n), cfg.gamma,
                           cfg.gae_lambda);

    double mean = 0.0;
    for (double a : adv.advantages) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : adv.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : adv.advantages) {
        a = (a - mean) / (sd > 1e-8 ? sd : 1.0);
        if (!std::isfinite(a)) throw Error("non-finite advantage in PPO update");
    }

    PpoUpdateStats stats;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t mb = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.minibatch));
    rlcore::AdamConfig adam{cfg.lr};
    std::vector<double> inputs;
    std::size_t clipped = 0, seen = 0;
    double actor_loss = 0.0, critic_loss = 0.0, entropy = 0.0;

    for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        for (std::size_t start = 0; start < n; start += mb) {
            const std::size_t count = std::min(mb, n - start);
            const std::span<const std::size_t> idx(order.data() + start, count);
            inputs.resize(count * in_dim);
            for (std::size_t k = 0; k < count; ++k)
                std::copy(steps[idx[k]].obs.begin(), steps[idx[k]].obs.end(), inputs.begin() + k * in_dim);
            const double scale = 1.0 / static_cast<double>(count);

            std::vector<char> was_clipped(count, 0);
            std::vector<double> ent(count, 0.0);
            auto actor_grad = rlcore::batch_gradient(
                model.actor, inputs, count, [&](std::size_t k, std::span<const double> logits, std::span<double> up) {
                    const auto& st = steps[idx[k]];
                    auto s = ppo_surrogate(logits, st.action, st.log_prob, adv.advantages[idx[k]], cfg.clip,
                                           cfg.entropy_coef);
                    for (std::size_t j = 0; j < up.size(); ++j) up[j] = s.dlogits[j] * scale;
                    was_clipped[k] = s.clipped;
                    ent[k] = s.entropy;
                    return s.loss * scale;
                });
            rlcore::clip_grad_norm(actor_grad.grad, cfg.max_grad_norm);
            rlcore::adam_step(model.actor.params(), actor_grad.grad, model.actor_opt, adam);

            auto critic_grad = rlcore::batch_gradient(
                model.critic, inputs, count, [&](std::size_t k, std::span<const double> v, std::span<double> up) {
                    const double d = v[0] - adv.returns[idx[k]];
                    up[0] = 2.0 * cfg.value_coef * d * scale;
                    return cfg.value_coef * d * d * scale;
                });
            rlcore::clip_grad_norm(critic_grad.grad, cfg.max_grad_norm);
            rlcore::adam_step(model.critic.params(), critic_grad.grad, model.critic_opt, adam);

            actor_loss += actor_grad.loss;
            critic_loss += critic_grad.loss;
            for (std::size_t k = 0; k < count; ++k) {
                clipped += was_clipped[k] ? 1 : 0;
                entropy += ent[k];
            }
            seen += count;
        }
    }
    const double batches = std::ceil(static_cast<double>(n) / static_cast<double>(mb)) * cfg.update_epochs;
    stats.actor_loss = actor_loss / batches;
    stats.critic_loss = critic_loss / batches;
    stats.entropy = entropy / static_cast<double>(seen);
    stats.clip_fraction = static_cast<double>(clipped) / static_cast<double>(seen);

    stats.post_ratios.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto logp = log_softmax(model.actor.forward(steps[t].obs));
        stats.post_ratios[t] = std::exp(logp[steps[t].action] - steps[t].log_prob);
    }
    return stats;
}

PpoAgent::PpoAgent(int num_actions, PpoConfig cfg, std::uint64_t seed)
    : num_actions_(num_actions), cfg_(std::move(cfg)), rng_(Rng::substream("ppo", seed)), norm_(kObsDim) {
    if (num_actions_ < 1) throw Error("PPO agent needs at least one action");
    model_.actor = rlcore::DenseNet::mlp(kObsDim, cfg_.hidden, num_actions_, rlcore::Activation::tanh,
                                         rlcore::Activation::identity, rng_, 0.01);
    model_.critic = rlcore::DenseNet::mlp(kObsDim, cfg_.hidden, 1, rlcore::Activation::tanh,
                                          rlcore::Activation::identity, rng_, 1.0);
    model_.actor_opt = rlcore::AdamState(model_.actor.num_params());
    model_.critic_opt = rlcore::AdamState(model_.critic.num_params());
}

std::vector<double> PpoAgent::input(const Observation& obs) const {
    const auto raw = obs.to_array();
    if (!cfg_.normalize_obs) return {raw.begin(), raw.end()};
    return norm_.normalize(raw);
}

std::vector<double> PpoAgent::action_probs(const Observation& obs) const {
    auto lp = log_softmax(model_.actor.forward(input(obs)));
    for (auto& v : lp) v = std::exp(v);
    return lp;
}

double PpoAgent::value(const Observation& obs) const { return model_.critic.forward(input(obs))[0]; }

SlicingAction PpoAgent::act(const Observation& obs, ActMode mode, Rng& rng) const {
    const auto logits = model_.actor.forward(input(obs));
    if (mode == ActMode::greedy) return action_from_index(argmax_lowest(logits.data(), num_actions_));
    const auto probs = action_probs(obs);
    return action_from_index(sample_categorical(probs, rng));
}

SlicingAction PpoAgent::explore(const Observation& obs) {
    if (pending_) throw Error("explore() called twice without observe()");
    if (cfg_.normalize_obs) norm_.update(obs.to_array());
    PpoStep step;
    step.obs = input(obs);
    const auto logp = log_softmax(model_.actor.forward(step.obs));
    std::vector<double> probs(logp.size());
    for (std::size_t i = 0; i < logp.size(); ++i) probs[i] = std::exp(logp[i]);
    step.action = sample_categorical(probs, rng_);
    step.log_prob = logp[step.action];
    step.value = model_.critic.forward(step.obs)[0];
    buffer_.push_back(std::move(step));
    pending_ = true;
    return action_from_index(buffer_.back().action);
}

void PpoAgent::observe(double reward, const Observation& next, bool episode_end) {
    if (!pending_) throw Error("observe() without a pending explore()");
    pending_ = false;
    auto& step = buffer_.back();
    step.reward = reward;
    if (!episode_end) return;
    step.episode_end = true;
    step.bootstrap_value = model_.critic.forward(input(next))[0];
    if (++episodes_in_buffer_ < cfg_.episodes_per_update) return;

    auto stats = ppo_update(model_, buffer_, cfg_, rng_);
    stats.post_ratios.clear();
    history_.push_back(std::move(stats));
    buffer_.clear();
    episodes_in_buffer_ = 0;
}

rlcore::Checkpoint PpoAgent::checkpoint() const {
    rlcore::Checkpoint c;
    c.meta = {{"kind", "ppo"}, {"num_actions", num_actions_}, {"config", ppo_config_json(cfg_)}};
    c.add_net("actor", model_.actor);
    c.add_net("critic", model_.critic);
    c.add_values("normalizer", norm_.to_flat());
    return c;
}

PpoAgent PpoAgent::from_checkpoint(const rlcore::Checkpoint& ckpt) {
    if (ckpt.meta.value("kind", "") != "ppo") throw Error("checkpoint is not a PPO agent");
    const auto& jc = ckpt.meta.at("config");
    PpoConfig cfg;
    cfg.clip = jc.at("clip");
    cfg.gamma = jc.at("gamma");
    cfg.gae_lambda = jc.at("gae_lambda");
    cfg.update_epochs = jc.at("update_epochs");
    cfg.minibatch = jc.at("minibatch");
    cfg.episodes_per_update = jc.at("episodes_per_update");
    cfg.entropy_coef = jc.at("entropy_coef");
    cfg.value_coef = jc.at("value_coef");
    cfg.lr = jc.at("lr");
    cfg.max_grad_norm = jc.at("max_grad_norm");
    cfg.hidden = jc.at("hidden").get<std::vector<int>>();
    cfg.normalize_obs = jc.at("normalize_obs");

    PpoAgent agent(ckpt.meta.at("num_actions").get<int>(), cfg, 0);
    agent.model_.actor = ckpt.net("actor");
    agent.model_.critic = ckpt.net("critic");
    agent.model_.actor_opt = rlcore::AdamState(agent.model_.actor.num_params());
    agent.model_.critic_opt = rlcore::AdamState(agent.model_.critic.num_params());
    agent.norm_ = rlcore::RunningNormalizer::from_flat(ckpt.block("normalizer").values);
    agent.norm_.freeze();
    return agent;
}

}  // namespace slicelab::agents
