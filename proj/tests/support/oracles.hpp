#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "slicelab/core/config.hpp"
#include "slicelab/core/rng.hpp"
#include "slicelab/ransim/simulator.hpp"
#include "slicelab/rlcore/dense_net.hpp"

namespace oracle {

// Reward written out term by term.
inline double reward(double phi_sla, double phi_meas, int a, int C, double k, bool corrected) {
    const double sig = 1.0 / (1.0 + std::exp(k * (phi_sla - phi_meas)));
    const bool gate = corrected ? (phi_meas >= phi_sla) : (phi_meas <= phi_sla);
    return sig + (gate ? (1.0 - static_cast<double>(a) / C) : 0.0);
}

inline double conformance(const std::vector<double>& d, double lambda) {
    if (d.empty()) return 1.0;
    int hits = 0;
    for (double x : d)
        if (x < lambda) ++hits;
    return static_cast<double>(hits) / static_cast<double>(d.size());
}

// Plain loops over the parameter layout (W row-major, then b, per layer).
inline std::vector<double> forward(const slicelab::rlcore::DenseNet& net, std::vector<double> x) {
    const auto& arch = net.arch();
    auto p = net.params();
    std::size_t off = 0;
    for (const auto& l : arch.layers) {
        std::vector<double> y(static_cast<std::size_t>(l.out));
        for (int o = 0; o < l.out; ++o) {
            double s = p[off + static_cast<std::size_t>(l.in * l.out + o)];
            for (int i = 0; i < l.in; ++i) s += p[off + static_cast<std::size_t>(o * l.in + i)] * x[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(o)] = s;
        }
        off += static_cast<std::size_t>(l.in * l.out + l.out);
        using slicelab::rlcore::Activation;
        switch (l.act) {
            case Activation::identity: break;
            case Activation::tanh:
                for (auto& v : y) v = std::tanh(v);
                break;
            case Activation::relu:
                for (auto& v : y) v = v > 0 ? v : 0.0;
                break;
            case Activation::softmax: {
                double m = y[0];
                for (double v : y) m = std::max(m, v);
                double z = 0;
                for (auto& v : y) z += (v = std::exp(v - m));
                for (auto& v : y) v /= z;
                break;
            }
        }
        x = std::move(y);
    }
    return x;
}

// Central differences of <u, f(x)> with respect to every parameter.
inline std::vector<double> numeric_grad(slicelab::rlcore::DenseNet net, const std::vector<double>& x,
                                        const std::vector<double>& u, double eps = 1e-5) {
    auto objective = [&](const slicelab::rlcore::DenseNet& n) {
        const auto y = forward(n, x);
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += u[i] * y[i];
        return s;
    };
    std::vector<double> g(net.num_params());
    auto p = net.params();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + eps;
        const double up = objective(net);
        p[i] = keep - eps;
        const double down = objective(net);
        p[i] = keep;
        g[i] = (up - down) / (2 * eps);
    }
    return g;
}

// Deterministic MDP with two states and two actions; next state is the
// action index, rewards r[s][a].
struct ChainMdp {
    std::array<std::array<double, 2>, 2> r{{{0.0, 1.0}, {2.0, 0.5}}};
    double gamma = 0.9;

    std::array<std::array<double, 2>, 2> q_star() const {
        std::array<std::array<double, 2>, 2> q{};
        for (int it = 0; it < 5000; ++it) {
            auto nq = q;
            for (int s = 0; s < 2; ++s)
                for (int a = 0; a < 2; ++a) nq[s][a] = r[s][a] + gamma * std::max(q[a][0], q[a][1]);
            q = nq;
        }
        return q;
    }
};

// Monte-Carlo reference for the clamped Gaussian walk started at eta0.
inline double clamped_walk_mean(double eta0, double sigma, double lo, double hi, int steps, int walks,
                                std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> n(0.0, sigma);
    double total = 0;
    for (int w = 0; w < walks; ++w) {
        double e = eta0;
        for (int s = 0; s < steps; ++s) e = std::min(hi, std::max(lo, e + n(g)));
        total += e;
    }
    return total / walks;
}

// Randomised simulator configuration for property tests.
inline slicelab::SimConfig random_sim(slicelab::Rng& rng) {
    slicelab::SimConfig c;
    c.capacity = rng.uniform_int(10, 60);
    c.eta_sigma = rng.uniform(0.0, 0.3);
    c.eta_init = rng.uniform(0.6, 5.5);
    c.backhaul_ms = rng.uniform(0.0, 10.0);
    const int slices = rng.uniform_int(1, 3);
    c.slices.clear();
    for (int s = 0; s < slices; ++s) {
        slicelab::SliceConfig sc;
        sc.num_ues = rng.uniform_int(0, 4);
        sc.bitrate_mbps = rng.uniform(0.2, 4.0);
        sc.packet_bytes = rng.uniform_int(100, 1500);
        sc.burst_packets = rng.uniform_int(1, 12);
        c.slices.push_back(sc);
    }
    return c;
}

// Runs `epochs` epochs with random grants and checks
// generated == delivered + queued after each epoch, for every slice.
inline std::string check_bit_conservation(std::uint64_t seed, int epochs = 20) {
    slicelab::Rng rng(seed);
    const auto cfg = random_sim(rng);
    slicelab::ransim::Simulator sim(cfg, seed);
    for (int e = 0; e < epochs; ++e) {
        std::vector<int> grant(cfg.slices.size(), 0);
        int left = cfg.capacity;
        for (auto& g : grant) {
            g = rng.uniform_int(0, left);
            left -= g;
        }
        sim.step_epoch(grant, rng.uniform_int(1, 300));
        for (std::size_t s = 0; s < cfg.slices.size(); ++s) {
            const slicelab::SliceId id{static_cast<std::uint32_t>(s)};
            if (sim.bits_generated(id) != sim.bits_delivered(id) + sim.bits_queued(id))
                return "seed " + std::to_string(seed) + " epoch " + std::to_string(e) + " slice " +
                       std::to_string(s) + ": generated " + std::to_string(sim.bits_generated(id)) +
                       " != delivered " + std::to_string(sim.bits_delivered(id)) + " + queued " +
                       std::to_string(sim.bits_queued(id));
        }
    }
    return {};
}

// Two simulators with the same seed; slice 0 gets at least as many PRBs in
// the second one in every epoch. No packet of slice 0 may leave later.
inline std::string check_latency_monotonicity(std::uint64_t seed, int epochs = 12) {
    slicelab::Rng rng(seed ^ 0xabcdefULL);
    auto cfg = random_sim(rng);
    if (cfg.slices[0].num_ues == 0) cfg.slices[0].num_ues = 1;
    slicelab::ransim::Simulator lo(cfg, seed), hi(cfg, seed);
    std::map<std::tuple<std::uint32_t, slicelab::Micros, int>, slicelab::Micros> dep_lo, dep_hi;
    std::map<std::pair<std::uint32_t, slicelab::Micros>, int> seen_lo, seen_hi;
    auto record = [](const auto& reports, auto& dep, auto& seen) {
        for (const auto& p : reports[0].delivered) {
            const int k = seen[{p.ue, p.arrival_us}]++;
            dep[{p.ue, p.arrival_us, k}] = p.departure_us;
        }
    };
    for (int e = 0; e < epochs; ++e) {
        const int a = rng.uniform_int(0, cfg.capacity);
        const int b = rng.uniform_int(a, cfg.capacity);
        std::vector<int> ga(cfg.slices.size(), 0), gb(cfg.slices.size(), 0);
        ga[0] = a;
        gb[0] = b;
        record(lo.step_epoch(ga, 250), dep_lo, seen_lo);
        record(hi.step_epoch(gb, 250), dep_hi, seen_hi);
    }
    for (const auto& [key, d_lo] : dep_lo) {
        auto it = dep_hi.find(key);
        if (it == dep_hi.end())
            return "seed " + std::to_string(seed) + ": packet delivered with fewer PRBs but not with more";
        if (it->second > d_lo)
            return "seed " + std::to_string(seed) + ": packet of UE " + std::to_string(std::get<0>(key)) +
                   " arriving at " + std::to_string(std::get<1>(key)) + " us departs at " +
                   std::to_string(it->second) + " with more PRBs vs " + std::to_string(d_lo);
    }
    return {};
}

}  // namespace oracle
