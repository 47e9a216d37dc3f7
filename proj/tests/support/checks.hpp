#pragma once

// Experiments shared by the unit tests and the acceptance binary.

#include <boost/math/distributions/chi_squared.hpp>

#include <map>
#include <thread>
#include <vector>

#include "slicelab/agents/offline.hpp"
#include "slicelab/agents/ppo.hpp"
#include "slicelab/controlloop/loop.hpp"
#include "slicelab/core/rng.hpp"
#include "oracles.hpp"

namespace checks {

inline slicelab::rlcore::DenseNet random_net(slicelab::Rng& r, slicelab::rlcore::Activation out_act) {
    using slicelab::rlcore::Activation;
    const int in = r.uniform_int(1, 6);
    const int depth = r.uniform_int(0, 2);
    std::vector<int> hidden;
    for (int i = 0; i < depth; ++i) hidden.push_back(r.uniform_int(1, 8));
    const Activation acts[] = {Activation::tanh, Activation::relu};
    auto net = slicelab::rlcore::DenseNet::mlp(in, hidden, r.uniform_int(1, 5), acts[r.uniform_int(0, 1)], out_act, r);
    for (auto& p : net.params()) p += r.uniform(-0.3, 0.3);
    return net;
}

inline std::vector<double> random_vec(slicelab::Rng& r, std::size_t n, double lo = -1, double hi = 1) {
    std::vector<double> v(n);
    for (auto& x : v) x = r.uniform(lo, hi);
    return v;
}

// Worst relative error between backward() and central differences over
// `nets` random networks, cycling through the output heads.
inline double gradient_check(std::uint64_t seed, int nets = 20) {
    using slicelab::rlcore::Activation;
    slicelab::Rng r(seed);
    const Activation outs[] = {Activation::identity, Activation::softmax, Activation::tanh};
    double worst = 0;
    for (int i = 0; i < nets; ++i) {
        auto net = random_net(r, outs[i % 3]);
        const auto x = random_vec(r, static_cast<std::size_t>(net.input_dim()));
        const auto u = random_vec(r, static_cast<std::size_t>(net.output_dim()));
        const auto g = net.backward(x, u);
        const auto n = oracle::numeric_grad(net, x, u);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double denom = std::max({std::abs(g[k]), std::abs(n[k]), 1e-6});
            worst = std::max(worst, std::abs(g[k] - n[k]) / denom);
        }
    }
    return worst;
}

struct BanditResult {
    int updates = 0;         // PPO updates taken
    double best_prob = 0.0;  // probability of the better arm at the end
    bool reached = false;
};

// Bernoulli two-armed bandit (arm 0 pays with p=0.8, arm 1 with p=0.2) as
// one-step episodes. Stops as soon as the better arm has probability > 0.95.
inline BanditResult ppo_bandit(std::uint64_t seed, int max_updates = 200) {
    using namespace slicelab;
    PpoConfig cfg;
    cfg.episodes_per_update = 16;
    cfg.minibatch = 16;
    cfg.update_epochs = 4;
    cfg.lr = 3e-3;
    cfg.hidden = {16};
    cfg.entropy_coef = 0.0;
    agents::PpoAgent agent(2, cfg, seed);
    Rng env(Rng::substream("bandit", seed));
    const Observation obs{};
    BanditResult res;
    while (static_cast<int>(agent.history().size()) < max_updates) {
        const auto a = agent.explore(obs);
        const double p = a.prbs == 1 ? 0.8 : 0.2;
        agent.observe(env.uniform() < p ? 1.0 : 0.0, obs, true);
        res.updates = static_cast<int>(agent.history().size());
        res.best_prob = agent.action_probs(obs)[0];
        if (res.best_prob > 0.95) {
            res.reached = true;
            break;
        }
    }
    return res;
}

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Synthetic 1k-row dataset with a known discrete next-state law. For each
// (state bucket, action) group, draws from the sampler are compared with the
// group's empirical next-state frequencies; the statistic is pooled.
inline ChiSquareResult offline_chi_square(std::uint64_t seed, int rows = 1000, int draws_per_group = 2000) {
    using namespace slicelab;
    Rng r(seed);
    const std::vector<double> next_values{0.0, 1.0, 2.0, 3.0};
    std::vector<Transition> ts;
    for (int i = 0; i < rows; ++i) {
        Transition t;
        const int s = r.uniform_int(0, 2);
        t.state.tb = s * 100.0;
        t.action = SlicingAction{r.uniform_int(1, 2)};
        // next-state law depends on (s, a)
        const double w[4] = {1.0 + s, 2.0, 1.0 + t.action.prbs, 0.5};
        double u = r.uniform() * (w[0] + w[1] + w[2] + w[3]);
        int k = 0;
        while (k < 3 && u >= w[k]) u -= w[k++];
        t.next_state.tb = next_values[static_cast<std::size_t>(k)];
        t.reward = 0.0;
        ts.push_back(t);
    }
    agents::OfflineDataset data(ts, 8);
    Rng draw(Rng::substream("chi", seed));
    ChiSquareResult res;
    for (int s = 0; s < 3; ++s)
        for (int a = 1; a <= 2; ++a) {
            Observation q;
            q.tb = s * 100.0;
            const auto cand = data.candidates(q, SlicingAction{a});
            std::map<double, double> expected;
            for (auto i : cand) expected[data.rows()[i].next_state.tb] += 1.0;
            std::map<double, double> observed;
            for (int d = 0; d < draws_per_group; ++d)
                observed[data.sample(q, SlicingAction{a}, draw).next_state.tb] += 1.0;
            for (const auto& [v, c] : expected) {
                const double e = c / static_cast<double>(cand.size()) * draws_per_group;
                const double o = observed[v];
                res.statistic += (o - e) * (o - e) / e;
            }
            res.dof += static_cast<int>(expected.size()) - 1;
        }
    boost::math::chi_squared dist(res.dof);
    res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
    return res;
}

struct TracePair {
    slicelab::controlloop::LoopTrace in_process;
    slicelab::controlloop::LoopTrace socket;
    std::size_t served = 0;
};

// Runs the same closed loop once through the in-process channel and once
// over a loopback TCP connection. Agents act in sample mode so the
// controller's random stream is exercised too.
inline TracePair loop_both_ways(const slicelab::Config& cfg, std::uint64_t seed,
                                const std::map<std::uint32_t, const slicelab::agents::Agent*>& agents,
                                const slicelab::controlloop::LoopOptions& opts) {
    using namespace slicelab::controlloop;
    TracePair out;
    {
        XApp xapp(agents, slicelab::agents::ActMode::sample, seed);
        InProcessChannel ch(xapp);
        out.in_process = run_closed_loop(cfg, seed, ch, opts);
    }
    TcpListener listener("127.0.0.1", 0);
    std::exception_ptr agent_error;
    std::thread agent_side([&] {
        try {
            auto stream = TcpStream::connect("127.0.0.1", listener.port());
            XApp xapp(agents, slicelab::agents::ActMode::sample, seed);
            out.served = serve_xapp(stream, xapp);
        } catch (...) {
            agent_error = std::current_exception();
        }
    });
    try {
        auto stream = listener.accept();
        SocketChannel ch(stream);
        out.socket = run_closed_loop(cfg, seed, ch, opts);
        stream.close();
    } catch (...) {
        agent_side.join();
        throw;
    }
    agent_side.join();
    if (agent_error) std::rethrow_exception(agent_error);
    return out;
}

inline bool same_trace(const slicelab::controlloop::LoopTrace& a, const slicelab::controlloop::LoopTrace& b) {
    return a.rows == b.rows && a.requested == b.requested && a.allocations == b.allocations;
}

}  // namespace checks
