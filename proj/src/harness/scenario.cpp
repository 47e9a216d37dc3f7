#include "slicelab/harness/scenario.hpp"

namespace slicelab::harness {

namespace {

SliceConfig bursty_slice(double lambda_ms, double phi) {
    SliceConfig s;
    s.num_ues = 2;
    s.bitrate_mbps = 1.5;
    s.packet_bytes = 1500;
    s.burst_packets = 10;
    s.sla.lambda_ms = lambda_ms;
    s.sla.phi_sla = phi;
    return s;
}

}  // namespace

void ScenarioSpec::validate() const {
    config.validate();
    for (const auto& s : config.sim.slices) {
        if (!s.controlled) continue;
        const auto& sla = s.sla;
        if (sla.randomize_lambda && !(sla.lambda_lo_ms < sla.lambda_hi_ms))
            throw Error("scenario " + name + ": lambda range must satisfy lo < hi");
        for (const auto& p : config.training.eval_grid) {
            p.validate();
            if (sla.randomize_lambda && (p.lambda_ms < sla.lambda_lo_ms || p.lambda_ms > sla.lambda_hi_ms))
                throw Error("scenario " + name + ": evaluation lambda " + std::to_string(p.lambda_ms) +
                            " ms lies outside the training range");
        }
    }
}

ScenarioSpec stat_scenario() {
    ScenarioSpec s;
    s.name = "stat";
    Config& c = s.config;
    c.name = "stat";
    c.sim.slices = {bursty_slice(110.0, 0.99), bursty_slice(50.0, 0.99)};
    c.training.episodes = 500;
    c.training.episode_len = 100;
    c.training.eval_every = 125;
    c.training.eval_episodes = 5;
    c.training.seeds = {1};
    c.ppo.episodes_per_update = 2;
    return s;
}

ScenarioSpec dyn_scenario() {
    ScenarioSpec s;
    s.name = "dyn";
    Config& c = s.config;
    c.name = "dyn";
    auto slice = bursty_slice(110.0, 0.9);
    slice.sla.randomize_lambda = true;
    slice.sla.lambda_lo_ms = 10.0;
    slice.sla.lambda_hi_ms = 110.0;
    c.sim.slices = {slice};
    c.training.episodes = 1500;
    c.training.episode_len = 100;
    c.training.eval_every = 250;
    c.training.eval_episodes = 5;
    c.training.eval_grid = {SlaSpec{30.0, 0.9}, SlaSpec{110.0, 0.9}};
    c.training.seeds = {1, 2, 3, 4, 5};
    c.ppo.episodes_per_update = 2;
    return s;
}

ScenarioSpec scenario_from_name(const std::string& name) {
    ScenarioSpec s;
    if (name == "stat") {
        s = stat_scenario();
    } else if (name == "dyn") {
        s = dyn_scenario();
    } else if (name.rfind("custom:", 0) == 0) {
        const auto path = name.substr(7);
        if (path.empty()) throw Error("custom scenario needs a config path: custom:<path>");
        s.config = load_config(path);
        s.name = s.config.name;
    } else {
        throw Error("unknown scenario '" + name + "' (expected stat, dyn or custom:<path>)");
    }
    s.validate();
    return s;
}

}  // namespace slicelab::harness
