#include <doctest.h>

#include <cmath>
#include <numeric>

#include "checks.hpp"
#include "oracles.hpp"
#include "slicelab/agents/dqn.hpp"
#include "slicelab/agents/env.hpp"
#include "slicelab/agents/factory.hpp"
#include "slicelab/agents/offline.hpp"
#include "slicelab/agents/ppo.hpp"
#include "slicelab/agents/qlearning.hpp"
#include "slicelab/agents/reward.hpp"

using namespace slicelab;
using namespace slicelab::agents;

TEST_CASE("reward worked examples") {
    // sigmoid(0) with the bonus gated off by a = C
    CHECK(reward(0.99, 0.99, SlicingAction{50}, 50, 20) == doctest::Approx(0.5).epsilon(1e-12));
    // 1/(1+e^-2) + (1 - 10/50)
    CHECK(reward(0.9, 1.0, SlicingAction{10}, 50, 20) == doctest::Approx(1.6807970779778823).epsilon(1e-12));
    // 1/(1+e^8), gate closed
    CHECK(reward(0.99, 0.59, SlicingAction{10}, 50, 20) == doctest::Approx(3.353501304664781e-4).epsilon(1e-9));
    CHECK(reward(0.99, 0.59, SlicingAction{10}, 50, 20, RewardIndicator::as_written) ==
          doctest::Approx(3.353501304664781e-4 + 0.8).epsilon(1e-12));
    CHECK_THROWS_AS(reward(0.9, 0.9, SlicingAction{51}, 50, 20), Error);
    CHECK_THROWS_AS(reward(0.9, 0.9, SlicingAction{-1}, 50, 20), Error);
    CHECK_THROWS_AS(reward(0.9, 0.9, SlicingAction{5}, 50, 0), Error);
}

TEST_CASE("reward matches the term-by-term oracle on random inputs") {
    Rng r(40);
    for (int i = 0; i < 1000; ++i) {
        const int C = r.uniform_int(1, 100);
        const int a = r.uniform_int(0, C);
        const double phi_sla = r.uniform(0.5, 1.0);
        const double phi_meas = r.uniform() < 0.1 ? phi_sla : r.uniform();
        const double k = r.uniform(1, 40);
        for (bool corrected : {true, false}) {
            const auto ind = corrected ? RewardIndicator::corrected : RewardIndicator::as_written;
            CHECK(std::abs(reward(phi_sla, phi_meas, SlicingAction{a}, C, k, ind) -
                           oracle::reward(phi_sla, phi_meas, a, C, k, corrected)) <= 1e-12);
        }
    }
}

TEST_CASE("corrected reward prefers meeting the SLA with fewer PRBs") {
    for (int a = 1; a < 50; ++a)
        CHECK(reward(0.9, 0.95, SlicingAction{a}, 50, 20) > reward(0.9, 0.95, SlicingAction{a + 1}, 50, 20));
    for (double m = 0.0; m < 0.99; m += 0.01)
        CHECK(reward(0.9, m, SlicingAction{10}, 50, 20) < reward(0.9, m + 0.01, SlicingAction{10}, 50, 20));
}

TEST_CASE("GAE with lambda 0 is the one-step TD error") {
    const std::vector<double> r{1, 0.5, -1, 2}, v{0.3, 0.1, 0.7, -0.2}, nv{0.1, 0.7, -0.2, 0.4};
    const bool cut[] = {false, false, false, true};
    const auto out = compute_gae(r, v, nv, cut, 0.9, 0.0);
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(out.advantages[t] == doctest::Approx(r[t] + 0.9 * nv[t] - v[t]));
        CHECK(out.returns[t] == doctest::Approx(out.advantages[t] + v[t]));
    }
}

TEST_CASE("GAE with lambda 1 is the discounted return minus the value") {
    const std::vector<double> r{1, 0.5, -1, 2, 3}, v{0.3, 0.1, 0.7, -0.2, 5}, nv{0.1, 0.7, -0.2, 0.4, 9};
    const bool cut[] = {false, false, false, true, true};
    const double g = 0.95;
    const auto out = compute_gae(r, v, nv, cut, g, 1.0);
    // episode 1: steps 0..3 bootstrapping V=0.4 after step 3
    for (std::size_t t = 0; t < 4; ++t) {
        double ret = 0, disc = 1;
        for (std::size_t u = t; u < 4; ++u, disc *= g) ret += disc * r[u];
        ret += disc * 0.4;
        CHECK(out.advantages[t] == doctest::Approx(ret - v[t]));
        CHECK(out.returns[t] == doctest::Approx(ret));
    }
    CHECK(out.advantages[4] == doctest::Approx(3 + g * 9 - 5));
}

TEST_CASE("surrogate gradient at ratio 1 is the policy gradient") {
    Rng r(41);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> logits(5);
        for (auto& l : logits) l = r.uniform(-3, 3);
        const auto logp = log_softmax(logits);
        const int a = r.uniform_int(0, 4);
        const double adv = r.uniform(-2, 2);
        const auto s = ppo_surrogate(logits, a, logp[static_cast<std::size_t>(a)], adv, 0.2, 0.0);
        CHECK(s.ratio == doctest::Approx(1.0));
        CHECK(s.loss == doctest::Approx(-adv));
        for (std::size_t j = 0; j < 5; ++j) {
            const double pj = std::exp(logp[j]);
            const double expect = -adv * ((static_cast<int>(j) == a ? 1.0 : 0.0) - pj);
            CHECK(s.dlogits[j] == doctest::Approx(expect));
        }
    }
}

TEST_CASE("surrogate gradient vanishes on the clipped branch") {
    const std::vector<double> logits{0.2, -0.4, 1.0};
    const auto logp = log_softmax(logits);
    // ratio e^0.5 > 1.2 with positive advantage
    auto s = ppo_surrogate(logits, 1, logp[1] - 0.5, 1.5, 0.2, 0.0);
    CHECK(s.clipped);
    for (double d : s.dlogits) CHECK(d == 0.0);
    CHECK(s.loss == doctest::Approx(-1.2 * 1.5));
    // ratio e^-0.5 < 0.8 with negative advantage
    s = ppo_surrogate(logits, 2, logp[2] + 0.5, -1.0, 0.2, 0.0);
    CHECK(s.clipped);
    for (double d : s.dlogits) CHECK(d == 0.0);
    // ratio above the band but negative advantage stays unclipped
    s = ppo_surrogate(logits, 1, logp[1] - 0.5, -1.0, 0.2, 0.0);
    CHECK_FALSE(s.clipped);
}

TEST_CASE("surrogate entropy gradient matches finite differences") {
    const std::vector<double> logits{0.3, -1.2, 0.8, 0.1};
    const auto logp = log_softmax(logits);
    const auto s = ppo_surrogate(logits, 2, logp[2] + 0.1, 0.7, 0.2, 0.05);
    for (std::size_t j = 0; j < 4; ++j) {
        auto up = logits, dn = logits;
        up[j] += 1e-6;
        dn[j] -= 1e-6;
        const double fd = (ppo_surrogate(up, 2, logp[2] + 0.1, 0.7, 0.2, 0.05).loss -
                           ppo_surrogate(dn, 2, logp[2] + 0.1, 0.7, 0.2, 0.05).loss) /
                          2e-6;
        CHECK(s.dlogits[j] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("PPO learns a two-armed bandit on five seeds") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto res = checks::ppo_bandit(seed);
        CHECK_MESSAGE(res.reached, "seed " << seed << " best-arm probability " << res.best_prob);
        CHECK(res.updates <= 200);
    }
}

TEST_CASE("post-update ratios stay near the clip band") {
    Rng r(42);
    PpoConfig cfg;
    cfg.update_epochs = 4;
    cfg.minibatch = 32;
    cfg.lr = 1e-3;
    ActorCritic m;
    const std::vector<int> hidden{16};
    m.actor = rlcore::DenseNet::mlp(3, hidden, 4, rlcore::Activation::tanh, rlcore::Activation::identity, r, 0.01);
    m.critic = rlcore::DenseNet::mlp(3, hidden, 1, rlcore::Activation::tanh, rlcore::Activation::identity, r);
    m.actor_opt = rlcore::AdamState(m.actor.num_params());
    m.critic_opt = rlcore::AdamState(m.critic.num_params());
    std::vector<PpoStep> steps;
    for (int i = 0; i < 256; ++i) {
        PpoStep s;
        s.obs = {r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1)};
        const auto logp = log_softmax(m.actor.forward(s.obs));
        s.action = r.uniform_int(0, 3);
        s.log_prob = logp[static_cast<std::size_t>(s.action)];
        s.reward = s.action == 0 ? 1.0 : r.uniform(-1, 0);
        s.value = m.critic.forward(s.obs)[0];
        s.episode_end = i % 16 == 15;
        steps.push_back(s);
    }
    const auto stats = ppo_update(m, steps, cfg, r);
    REQUIRE(stats.post_ratios.size() == steps.size());
    const double delta = 0.05;
    int inside = 0;
    for (double q : stats.post_ratios)
        if (q >= 1 - cfg.clip - delta && q <= 1 + cfg.clip + delta) ++inside;
    CHECK(inside >= 0.99 * static_cast<double>(steps.size()));
    CHECK_THROWS_AS(ppo_update(m, {}, cfg, r), Error);
}

TEST_CASE("greedy act breaks ties towards fewer PRBs and sample mode follows the policy") {
    PpoConfig cfg;
    cfg.hidden = {8};
    cfg.normalize_obs = false;
    PpoAgent agent(3, cfg, 5);
    auto& actor = agent.model().actor;
    std::fill(actor.params().begin(), actor.params().end(), 0.0);
    Rng r(1);
    const Observation o{};
    CHECK(agent.act(o, ActMode::greedy, r).prbs == 1);
    const auto n = actor.params().size();
    actor.params()[n - 3] = std::log(0.2);
    actor.params()[n - 2] = std::log(0.5);
    actor.params()[n - 1] = std::log(0.3);
    CHECK(agent.act(o, ActMode::greedy, r).prbs == 2);
    std::array<int, 3> counts{};
    const int draws = 30000;
    for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(agent.act(o, ActMode::sample, r).prbs - 1)];
    const double expect[] = {0.2, 0.5, 0.3};
    double stat = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double e = expect[k] * draws;
        stat += (counts[k] - e) * (counts[k] - e) / e;
    }
    boost::math::chi_squared dist(2);
    CHECK(boost::math::cdf(boost::math::complement(dist, stat)) > 0.001);
    const double v[] = {1.0, 3.0, 3.0, 2.0};
    CHECK(argmax_lowest(v, 4) == 1);
}

TEST_CASE("PPO checkpoint restores the same greedy policy") {
    PpoConfig cfg;
    cfg.hidden = {8};
    cfg.episodes_per_update = 1;
    PpoAgent agent(5, cfg, 3);
    Rng r(9);
    Observation o;
    for (int i = 0; i < 40; ++i) {
        o.tb = r.uniform(0, 100);
        agent.explore(o);
        agent.observe(r.uniform(), o, i % 10 == 9);
    }
    const auto ckpt = agent.checkpoint();
    const auto back = load_agent(rlcore::Checkpoint::deserialize(ckpt.serialize()));
    CHECK(back->kind() == "ppo");
    for (int i = 0; i < 50; ++i) {
        o.tb = r.uniform(0, 100);
        o.d_mean_ms = r.uniform(0, 50);
        CHECK(back->act(o, ActMode::greedy, r) == agent.act(o, ActMode::greedy, r));
    }
    CHECK(back->checkpoint().serialize() == ckpt.serialize());
}

namespace {

Observation chain_state(int s) {
    Observation o;
    o.tb = s;
    return o;
}

std::vector<double> chain_encode(const Observation& o) { return {o.tb, 1.0 - o.tb}; }

QNetworks chain_nets(Rng& r) {
    QNetworks n;
    const std::vector<int> hidden{32};
    n.online = rlcore::DenseNet::mlp(2, hidden, 2, rlcore::Activation::relu, rlcore::Activation::identity, r);
    n.target = n.online;
    n.opt = rlcore::AdamState(n.online.num_params());
    return n;
}

ReplayBuffer chain_buffer(const oracle::ChainMdp& mdp) {
    ReplayBuffer b(64);
    for (int rep = 0; rep < 16; ++rep)
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) {
                Transition t;
                t.state = chain_state(s);
                t.action = action_from_index(a);
                t.reward = mdp.r[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                t.next_state = chain_state(a);
                b.push(t);
            }
    return b;
}

}  // namespace

TEST_CASE("replay buffer is a ring with uniform sampling") {
    ReplayBuffer b(3);
    for (int i = 0; i < 5; ++i) {
        Transition t;
        t.reward = i;
        b.push(t, i == 4);
    }
    CHECK(b.size() == 3);
    std::vector<double> seen;
    for (std::size_t i = 0; i < 3; ++i) seen.push_back(b[i].transition.reward);
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<double>{2, 3, 4});
    Rng r(1);
    std::array<int, 3> c{};
    for (auto i : b.sample(30000, r)) ++c[i];
    for (int k : c) CHECK(k == doctest::Approx(10000).epsilon(0.05));
}

TEST_CASE("DQN with gamma 0 regresses onto the rewards") {
    oracle::ChainMdp mdp;
    Rng r(50);
    auto nets = chain_nets(r);
    const auto buf = chain_buffer(mdp);
    for (int i = 0; i < 3000; ++i) dqn_update(buf, nets, 0.0, 32, 3e-3, 10.0, r, chain_encode);
    for (int s = 0; s < 2; ++s) {
        const auto q = nets.online.forward(chain_encode(chain_state(s)));
        for (std::size_t a = 0; a < 2; ++a) CHECK(q[a] == doctest::Approx(mdp.r[static_cast<std::size_t>(s)][a]).epsilon(0.02));
    }
}

TEST_CASE("DQN converges to the chain MDP's optimal values") {
    oracle::ChainMdp mdp;
    const auto qs = mdp.q_star();
    Rng r(51);
    auto nets = chain_nets(r);
    const auto buf = chain_buffer(mdp);
    for (int i = 0; i < 30000; ++i) {
        const double lr = i < 20000 ? 1e-3 : 1e-4;
        dqn_update(buf, nets, mdp.gamma, 32, lr, 10.0, r, chain_encode);
        if (i % 100 == 99) sync_target(nets);
    }
    for (int s = 0; s < 2; ++s) {
        const auto q = nets.online.forward(chain_encode(chain_state(s)));
        for (std::size_t a = 0; a < 2; ++a) CHECK(std::abs(q[a] - qs[static_cast<std::size_t>(s)][a]) < 1e-2);
    }
}

TEST_CASE("target network only moves on sync") {
    oracle::ChainMdp mdp;
    Rng r(52);
    auto nets = chain_nets(r);
    const auto buf = chain_buffer(mdp);
    const std::vector<double> before(nets.target.params().begin(), nets.target.params().end());
    dqn_update(buf, nets, 0.9, 16, 1e-3, 1.0, r, chain_encode);
    CHECK(std::equal(before.begin(), before.end(), nets.target.params().begin()));
    CHECK_FALSE(std::equal(before.begin(), before.end(), nets.online.params().begin()));
    sync_target(nets);
    CHECK(std::equal(nets.online.params().begin(), nets.online.params().end(), nets.target.params().begin()));
    ReplayBuffer small(8);
    CHECK_THROWS_AS(dqn_update(small, nets, 0.9, 16, 1e-3, 1.0, r, chain_encode), Error);
}

TEST_CASE("epsilon schedule") {
    CHECK(linear_epsilon(0, 100, 1.0, 0.1) == 1.0);
    CHECK(linear_epsilon(50, 100, 1.0, 0.1) == doctest::Approx(0.55));
    CHECK(linear_epsilon(100, 100, 1.0, 0.1) == doctest::Approx(0.1));
    CHECK(linear_epsilon(1000, 100, 1.0, 0.1) == doctest::Approx(0.1));
}

TEST_CASE("DQN agent checkpoint round-trip") {
    DqnConfig cfg;
    cfg.hidden = {8};
    cfg.warmup_steps = 20;
    cfg.batch = 8;
    DqnAgent agent(4, cfg, 1);
    agent.set_step_budget(200);
    Rng r(2);
    Observation o;
    for (int i = 0; i < 200; ++i) {
        o.tb = r.uniform(0, 10);
        agent.explore(o);
        agent.observe(r.uniform(), o, i % 20 == 19);
    }
    CHECK(agent.updates() > 0);
    CHECK(agent.epsilon() == doctest::Approx(cfg.eps_end));
    const auto back = load_agent(agent.checkpoint());
    CHECK(back->kind() == "dqn");
    for (int i = 0; i < 30; ++i) {
        o.tb = r.uniform(0, 10);
        CHECK(back->act(o, ActMode::greedy, r) == agent.act(o, ActMode::greedy, r));
    }
}

namespace {

StateBucketer chain_bucketer() {
    StateBucketer b(4);
    const std::vector<Observation> states{chain_state(0), chain_state(1)};
    b.fit(states);
    return b;
}

}  // namespace

TEST_CASE("state bucketer") {
    StateBucketer b(4);
    std::vector<Observation> states(2);
    states[0].tb = 0;
    states[1].tb = 8;
    b.fit(states);
    CHECK(b.bin(0, -5) == 0);
    CHECK(b.bin(0, 0) == 0);
    CHECK(b.bin(0, 2.5) == 1);
    CHECK(b.bin(0, 7.9) == 3);
    CHECK(b.bin(0, 100) == 3);
    CHECK(b.bin(1, 0.3) == 0);  // constant feature
    const auto back = StateBucketer::from_flat(b.to_flat());
    CHECK(back.key(states[1]) == b.key(states[1]));
    CHECK(b.key(states[0]) != b.key(states[1]));
}

TEST_CASE("Q-learning with alpha 0 changes nothing") {
    QTable t(2, chain_bucketer());
    t.set(chain_state(0), SlicingAction{1}, 0.7);
    Transition tr;
    tr.state = chain_state(0);
    tr.action = SlicingAction{1};
    tr.reward = 5;
    tr.next_state = chain_state(1);
    qlearning_update(t, tr, 0.0, 0.9);
    CHECK(t.get(chain_state(0), SlicingAction{1}) == 0.7);
    CHECK(t.get(chain_state(1), SlicingAction{2}) == 0.0);
}

TEST_CASE("Q-learning error contracts geometrically on a self-loop") {
    QTable t(1, chain_bucketer());
    Transition tr;
    tr.state = chain_state(0);
    tr.next_state = chain_state(0);
    tr.action = SlicingAction{1};
    tr.reward = 1.0;
    const double alpha = 0.3, gamma = 0.8, fixed = 1.0 / (1 - gamma);
    const double rate = 1 - alpha * (1 - gamma);
    double err = fixed;
    for (int i = 0; i < 50; ++i) {
        qlearning_update(t, tr, alpha, gamma);
        err *= rate;
        CHECK(fixed - t.get(tr.state, tr.action) == doctest::Approx(err).epsilon(1e-9));
    }
}

TEST_CASE("Q-learning converges to the chain MDP's optimal values") {
    oracle::ChainMdp mdp;
    const auto qs = mdp.q_star();
    QTable t(2, chain_bucketer());
    for (int sweep = 0; sweep < 2000; ++sweep)
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) {
                Transition tr;
                tr.state = chain_state(s);
                tr.action = action_from_index(a);
                tr.reward = mdp.r[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                tr.next_state = chain_state(a);
                qlearning_update(t, tr, 0.5, mdp.gamma);
            }
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a)
            CHECK(t.get(chain_state(s), action_from_index(a)) ==
                  doctest::Approx(qs[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]).epsilon(1e-9));
    CHECK(t.num_states() == 2);
    QTable copy(2, chain_bucketer());
    copy.load_flat(t.to_flat());
    CHECK(copy.to_flat() == t.to_flat());
}

TEST_CASE("tabular agent defers learning until its bins are fitted") {
    QLearningConfig cfg;
    cfg.bin_fit_episodes = 2;
    QLearningAgent agent(5, cfg, 4);
    agent.set_step_budget(100);
    CHECK_THROWS_AS(agent.checkpoint(), Error);
    Rng r(3);
    Observation o;
    for (int i = 0; i < 40; ++i) {
        o.tb = r.uniform(0, 10);
        agent.explore(o);
        agent.observe(r.uniform(), o, i % 10 == 9);
    }
    CHECK(agent.table().bucketer().fitted());
    CHECK(agent.table().num_states() > 0);
    const auto back = load_agent(agent.checkpoint());
    CHECK(back->kind() == "qtab");
    for (int i = 0; i < 20; ++i) {
        o.tb = r.uniform(0, 10);
        CHECK(back->act(o, ActMode::greedy, r) == agent.act(o, ActMode::greedy, r));
    }
}

namespace {

Transition row(double tb, int action, double next_tb) {
    Transition t;
    t.state.tb = tb;
    t.action = SlicingAction{action};
    t.next_state.tb = next_tb;
    return t;
}

}  // namespace

TEST_CASE("offline sampler with one matching row returns it") {
    OfflineDataset d({row(0, 1, 5), row(10, 1, 6), row(10, 2, 7)}, 4);
    Rng r(1);
    for (int i = 0; i < 20; ++i) CHECK(d.sample(row(10, 2, 0).state, SlicingAction{2}, r).next_state.tb == 7);
}

TEST_CASE("offline sampler draws uniformly within a bucket") {
    OfflineDataset d({row(0, 1, 1), row(0.1, 1, 2), row(0.2, 1, 3), row(10, 1, 9)}, 4);
    Observation q;
    q.tb = 0.05;
    CHECK(d.candidates(q, SlicingAction{1}).size() == 3);
    Rng r(2);
    std::map<double, int> c;
    const int draws = 30000;
    for (int i = 0; i < draws; ++i) ++c[d.sample(q, SlicingAction{1}, r).next_state.tb];
    CHECK(c.size() == 3);
    double stat = 0;
    for (const auto& [v, n] : c) stat += (n - draws / 3.0) * (n - draws / 3.0) / (draws / 3.0);
    boost::math::chi_squared dist(2);
    CHECK(boost::math::cdf(boost::math::complement(dist, stat)) > 0.001);
}

TEST_CASE("offline sampler falls back to the nearest row with that action") {
    OfflineDataset d({row(0, 1, 1), row(4, 2, 2), row(6, 2, 3), row(10, 1, 4)}, 4);
    Observation q;
    q.tb = 1;  // bucket of tb=0 holds only action 1
    Rng r(3);
    CHECK(d.sample(q, SlicingAction{2}, r).next_state.tb == 2);
    q.tb = 9;
    CHECK(d.sample(q, SlicingAction{2}, r).next_state.tb == 3);
    CHECK_THROWS_AS(d.sample(q, SlicingAction{7}, r), Error);
    CHECK_FALSE(d.has_action(SlicingAction{7}));
}

TEST_CASE("offline conditional next-state frequencies match the data") {
    const auto res = checks::offline_chi_square(60);
    CHECK(res.dof > 0);
    CHECK(res.p_value > 0.01);
}

TEST_CASE("offline environment replays slices and recomputes rewards") {
    Config cfg;
    cfg.sim.slices = {SliceConfig{}, SliceConfig{}};
    cfg.training.episode_len = 5;
    std::vector<Transition> rows;
    Rng r(4);
    for (int i = 0; i < 200; ++i) {
        Transition t = row(r.uniform(0, 10), r.uniform() < 0.5 ? 3 : 30, 0);
        t.next_state.phi_meas = r.uniform();
        t.next_state.phi_sla = 0.9;
        t.slice = SliceId{static_cast<std::uint32_t>(i % 2)};
        rows.push_back(t);
    }
    OfflineEnv env(cfg, rows, 7);
    CHECK(env.num_agents() == 2);
    auto obs = env.reset(0);
    CHECK(obs.size() == 2);
    const std::vector<SlicingAction> acts{SlicingAction{3}, SlicingAction{30}};
    int steps = 0;
    while (true) {
        const auto st = env.step(acts);
        ++steps;
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(st.rewards[i] == doctest::Approx(reward(st.obs[i].phi_sla, st.obs[i].phi_meas, acts[i], 50,
                                                          cfg.reward.k, cfg.reward.indicator)));
        if (st.done) break;
    }
    CHECK(steps == 5);
    OfflineEnv again(cfg, rows, 7);
    CHECK(again.reset(0) == obs);
}

TEST_CASE("fixed agent and factory") {
    FixedAgent f(SlicingAction{7}, 49);
    Rng r(1);
    CHECK(f.act(Observation{}, ActMode::sample, r).prbs == 7);
    const auto back = load_agent(f.checkpoint());
    CHECK(back->kind() == "fixed");
    CHECK(back->act(Observation{}, ActMode::greedy, r).prbs == 7);
    Config cfg;
    for (std::string k : {"ppo", "dqn", "qtab"}) CHECK(make_learner(k, 49, cfg, 1)->kind() == k);
    CHECK_THROWS_AS(make_learner("sarsa", 49, cfg, 1), Error);
    auto short_run = cfg;
    short_run.training.episodes = short_run.qlearning.bin_fit_episodes - 1;
    CHECK_THROWS_AS(make_learner("qtab", 49, short_run, 1), Error);
}

TEST_CASE("slicing environment applies actions one epoch late") {
    Config cfg;
    SliceConfig s;
    s.sla.lambda_ms = 110;
    cfg.sim.slices = {s, s};
    cfg.training.episode_len = 4;
    SlicingEnv env(cfg, 3);
    env.reset(0);
    // epoch 0 ran with the even split; allocations are summed over TTIs
    const int ttis = cfg.sim.epoch_len_ms;
    CHECK(env.last_reports()[0].prbs_allocated == 25 * ttis);
    const std::vector<SlicingAction> a{SlicingAction{10}, SlicingAction{40}};
    const auto st = env.step(a);
    CHECK(st.applied == a);
    CHECK(env.last_reports()[0].prbs_allocated == 10 * ttis);
    CHECK(env.last_reports()[1].prbs_allocated == 40 * ttis);
    const std::vector<SlicingAction> bad{SlicingAction{0}, SlicingAction{10}};
    CHECK_THROWS_AS(env.step(bad), Error);
    env.set_strict(false);
    const auto clamped = env.step(bad);
    CHECK(clamped.applied[0].prbs == 1);
}
