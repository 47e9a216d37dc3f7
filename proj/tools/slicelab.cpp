// slicelab command-line front end.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

#include "slicelab/agents/env.hpp"
#include "slicelab/agents/factory.hpp"
#include "slicelab/controlloop/loop.hpp"
#include "slicelab/core/log.hpp"
#include "slicelab/harness/compare.hpp"
#include "slicelab/harness/runner.hpp"
#include "slicelab/kpm/dataset.hpp"
#include "slicelab/rlcore/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace slicelab;

namespace {

struct Common {
    std::string scenario = "stat";
    std::string config;
    std::uint64_t seed = 1;
    bool seed_set = false;
    std::string out = "out";
    std::string indicator;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--scenario", c.scenario, "stat, dyn or custom:<config.json>")->capture_default_str();
    cmd->add_option("--config", c.config, "JSON config replacing the scenario's config");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "random seed");
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--reward-indicator", c.indicator, "as-written or corrected")
        ->check(CLI::IsMember({"as-written", "corrected"}));
}

harness::ScenarioSpec load_scenario(const Common& c) {
    auto spec = harness::scenario_from_name(c.scenario);
    if (!c.config.empty()) spec.config = load_config(c.config);
    if (!c.indicator.empty()) spec.config.reward.indicator = parse_reward_indicator(c.indicator);
    spec.validate();
    return spec;
}

std::vector<SliceId> controlled(const Config& cfg) {
    std::vector<SliceId> v;
    for (int i = 0; i < cfg.sim.num_slices(); ++i)
        if (cfg.sim.slices[static_cast<std::size_t>(i)].controlled) v.push_back(SliceId{static_cast<std::uint32_t>(i)});
    return v;
}

// Loads one agent per controlled slice from a train output directory.
std::vector<std::unique_ptr<agents::Agent>> load_run_agents(const fs::path& run, std::uint64_t seed,
                                                            const Config& cfg) {
    std::vector<std::unique_ptr<agents::Agent>> out;
    for (auto s : controlled(cfg))
        out.push_back(agents::load_agent(
            rlcore::Checkpoint::load(harness::checkpoint_path(run / "checkpoints", seed, s))));
    return out;
}

std::vector<const agents::Agent*> borrow(const std::vector<std::unique_ptr<agents::Agent>>& v) {
    std::vector<const agents::Agent*> out;
    for (const auto& a : v) out.push_back(a.get());
    return out;
}

std::vector<std::unique_ptr<agents::Agent>> load_checkpoints(const std::vector<std::string>& paths,
                                                             const Config& cfg) {
    const auto slices = controlled(cfg);
    if (paths.size() != slices.size())
        throw Error("scenario controls " + std::to_string(slices.size()) + " slice(s); got " +
                    std::to_string(paths.size()) + " checkpoint(s)");
    std::vector<std::unique_ptr<agents::Agent>> out;
    for (const auto& p : paths) out.push_back(agents::load_agent(rlcore::Checkpoint::load(p)));
    return out;
}

int cmd_simulate(const Common& c, int prbs, int epochs) {
    const auto spec = load_scenario(c);
    const auto slices = controlled(spec.config);
    const int hi = max_action(spec.config.sim.capacity, spec.config.sim.num_slices());
    std::vector<agents::FixedAgent> fixed;
    std::map<std::uint32_t, const agents::Agent*> map;
    for (std::size_t i = 0; i < slices.size(); ++i) fixed.emplace_back(SlicingAction{prbs > 0 ? prbs : hi}, hi);
    for (std::size_t i = 0; i < slices.size(); ++i) map[slices[i].index] = &fixed[i];
    controlloop::XApp xapp(map, agents::ActMode::greedy, c.seed);
    controlloop::InProcessChannel ch(xapp);
    controlloop::LoopOptions o;
    o.n_epochs = epochs;
    const auto trace = controlloop::run_closed_loop(spec.config, c.seed, ch, o);
    fs::create_directories(c.out);
    kpm::save_dataset(trace.rows, fs::path(c.out) / "trace.csv");
    std::cout << "wrote " << trace.rows.size() << " rows to " << (fs::path(c.out) / "trace.csv").string() << "\n";
    return 0;
}

int cmd_collect(const Common& c, int episodes) {
    const auto spec = load_scenario(c);
    agents::SlicingEnv env(spec.config, c.seed, "collect");
    Rng rng = Rng::substream("collect/policy", c.seed);
    fs::create_directories(c.out);
    const auto path = fs::path(c.out) / "dataset.csv";
    fs::remove(path);
    kpm::DatasetWriter w(path);
    long rows = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        auto obs = env.reset(ep);
        std::vector<SlicingAction> act(env.num_agents());
        for (bool done = false; !done;) {
            for (auto& a : act) a = SlicingAction{rng.uniform_int(1, env.num_actions())};
            const std::uint32_t n = env.epoch();
            auto step = env.step(act);
            for (std::size_t i = 0; i < act.size(); ++i) {
                Transition t{obs[i], step.applied[i], step.rewards[i], step.obs[i], ep, EpochIndex{n},
                             env.controlled()[i]};
                w.record(t);
                ++rows;
            }
            obs = std::move(step.obs);
            done = step.done;
        }
    }
    w.close();
    std::cout << "wrote " << rows << " transitions to " << path.string() << "\n";
    return 0;
}

int cmd_train(const Common& c, const std::string& agent, int episodes, const std::string& offline) {
    auto spec = load_scenario(c);
    if (c.seed_set) spec.config.training.seeds = {c.seed};
    if (episodes > 0) spec.config.training.episodes = episodes;
    std::vector<Transition> rows;
    harness::TrainOptions o;
    o.agent = agent;
    if (!offline.empty()) {
        rows = kpm::load_dataset(offline);
        o.offline = &rows;
    }
    const auto res = harness::run_scenario(spec, o, fs::path(c.out));
    for (std::size_t p = 0; p < res.summary.grid.size(); ++p)
        for (std::size_t i = 0; i < res.summary.slices.size(); ++i)
            std::cout << harness::point_label(res.summary.grid[p]) << " slice " << res.summary.slices[i].index
                      << ": violation " << res.summary.stat(p, i, harness::Metric::violation).mean << ", prbs "
                      << res.summary.stat(p, i, harness::Metric::prbs).mean << ", reward "
                      << res.summary.stat(p, i, harness::Metric::reward).mean << "\n";
    return 0;
}

harness::EvalSummary eval_run(const fs::path& run, const harness::ScenarioSpec& spec, std::uint64_t seed_override,
                              bool override_set, int episodes) {
    const auto train_cfg = load_config(run / "config.json");
    std::vector<std::uint64_t> eval_seeds;
    std::vector<harness::GridMetrics> grids;
    std::string kind;
    for (auto s : train_cfg.training.seeds) {
        const auto agents = load_run_agents(run, s, spec.config);
        kind = agents.front()->kind();
        const auto eval_seed = override_set ? seed_override : s;
        eval_seeds.push_back(eval_seed);
        grids.push_back(harness::evaluate(spec.config, borrow(agents), eval_seed, episodes));
    }
    return harness::summarize(kind, spec.config, eval_seeds, grids);
}

int cmd_eval(const Common& c, const std::vector<std::string>& ckpts, const std::string& run, int episodes) {
    const auto spec = load_scenario(c);
    const int eps = episodes > 0 ? episodes : spec.config.training.eval_episodes;
    harness::EvalSummary summary;
    if (!run.empty()) {
        summary = eval_run(run, spec, c.seed, c.seed_set, eps);
    } else {
        const auto agents = load_checkpoints(ckpts, spec.config);
        const std::vector<std::uint64_t> seeds{c.seed};
        const std::vector<harness::GridMetrics> g{harness::evaluate(spec.config, borrow(agents), c.seed, eps)};
        summary = harness::summarize(agents.front()->kind(), spec.config, seeds, g);
    }
    fs::create_directories(c.out);
    harness::write_summary_csv(fs::path(c.out) / "summary.csv", summary);
    std::cout << "wrote " << (fs::path(c.out) / "summary.csv").string() << "\n";
    return 0;
}

int cmd_compare(const Common& c, const std::vector<std::string>& runs, int episodes) {
    const auto spec = load_scenario(c);
    const int eps = episodes > 0 ? episodes : spec.config.training.eval_episodes;
    std::vector<harness::EvalSummary> sums;
    for (const auto& r : runs) {
        auto s = eval_run(r, spec, c.seed, c.seed_set, eps);
        s.agent = fs::path(r).filename().string();
        if (s.agent.empty()) s.agent = fs::path(r).parent_path().filename().string();
        sums.push_back(std::move(s));
    }
    const auto rows = harness::compare_all(sums);
    fs::create_directories(c.out);
    for (const auto& s : sums) harness::write_summary_csv(fs::path(c.out) / ("summary_" + s.agent + ".csv"), s);
    harness::write_comparison_csv(fs::path(c.out) / "comparison.csv", rows);
    std::cout << "wrote " << (fs::path(c.out) / "comparison.csv").string() << "\n";
    return 0;
}

int cmd_serve(const Common& c, int epochs, int port, int timeout_ms) {
    const auto spec = load_scenario(c);
    controlloop::TcpListener listener("127.0.0.1", static_cast<std::uint16_t>(port));
    std::cout << "listening on 127.0.0.1:" << listener.port() << std::endl;
    auto stream = listener.accept(std::chrono::milliseconds(timeout_ms));
    controlloop::SocketChannel ch(stream, std::chrono::milliseconds(timeout_ms));
    controlloop::LoopOptions o;
    o.n_epochs = epochs;
    const auto trace = controlloop::run_closed_loop(spec.config, c.seed, ch, o);
    stream.close();
    fs::create_directories(c.out);
    kpm::save_dataset(trace.rows, fs::path(c.out) / "trace.csv");
    std::cout << "wrote " << trace.rows.size() << " rows to " << (fs::path(c.out) / "trace.csv").string() << "\n";
    return 0;
}

int cmd_agent(const Common& c, const std::vector<std::string>& ckpts, const std::string& host, int port,
              int timeout_ms) {
    const auto spec = load_scenario(c);
    const auto agents = load_checkpoints(ckpts, spec.config);
    const auto slices = controlled(spec.config);
    std::map<std::uint32_t, const agents::Agent*> map;
    for (std::size_t i = 0; i < slices.size(); ++i) map[slices[i].index] = agents[i].get();
    controlloop::XApp xapp(map, agents::ActMode::greedy, c.seed);
    auto stream = controlloop::TcpStream::connect(host, static_cast<std::uint16_t>(port),
                                                  std::chrono::milliseconds(timeout_ms));
    const auto n = controlloop::serve_xapp(stream, xapp, std::chrono::milliseconds(timeout_ms));
    std::cout << "sent " << n << " control messages\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAN slicing laboratory: simulator, agents and experiment harness"};
    app.require_subcommand(1);
    Common c;

    auto* sim = app.add_subcommand("simulate", "run the simulator under a fixed policy");
    add_common(sim, c);
    int prbs = 0, epochs = 100;
    sim->add_option("--prbs", prbs, "PRBs per controlled slice (default: maximum)");
    sim->add_option("--epochs", epochs, "decision epochs")->capture_default_str();

    auto* col = app.add_subcommand("collect", "record a random-policy dataset for offline training");
    add_common(col, c);
    int col_episodes = 20;
    col->add_option("--episodes", col_episodes, "episodes to record")->capture_default_str();

    auto* tr = app.add_subcommand("train", "train an agent on a scenario");
    add_common(tr, c);
    std::string agent = "ppo", offline;
    int episodes = 0;
    tr->add_option("--agent", agent, "ppo, dqn or qtab")->check(CLI::IsMember({"ppo", "dqn", "qtab"}))->capture_default_str();
    tr->add_option("--episodes", episodes, "override the scenario's episode count");
    tr->add_option("--offline", offline, "train from this dataset instead of the simulator");

    auto* ev = app.add_subcommand("eval", "evaluate checkpoints greedily on the scenario's SLA grid");
    add_common(ev, c);
    std::vector<std::string> ckpts;
    std::string run;
    int eval_episodes = 0;
    ev->add_option("--checkpoint", ckpts, "one checkpoint per controlled slice");
    ev->add_option("--run", run, "train output directory (all seeds)");
    ev->add_option("--episodes", eval_episodes, "evaluation episodes");

    auto* cmp = app.add_subcommand("compare", "compare trained runs on identical seeds and SLA grid");
    add_common(cmp, c);
    std::vector<std::string> runs;
    cmp->add_option("--run", runs, "train output directories")->required();
    cmp->add_option("--episodes", eval_episodes, "evaluation episodes");

    int port = 0, timeout_ms = 5000;
    auto* srv = app.add_subcommand("protocol-serve", "run the RAN side of the loop and wait for an agent");
    add_common(srv, c);
    srv->add_option("--epochs", epochs, "decision epochs")->capture_default_str();
    srv->add_option("--port", port, "TCP port on 127.0.0.1 (0: ephemeral)");
    srv->add_option("--timeout-ms", timeout_ms, "per-message timeout")->capture_default_str();

    auto* agt = app.add_subcommand("protocol-agent", "connect an agent to a running protocol-serve");
    add_common(agt, c);
    std::string host = "127.0.0.1";
    agt->add_option("--checkpoint", ckpts, "one checkpoint per controlled slice")->required();
    agt->add_option("--host", host)->capture_default_str();
    agt->add_option("--port", port)->required();
    agt->add_option("--timeout-ms", timeout_ms, "per-message timeout")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(c, prbs, epochs);
        if (col->parsed()) return cmd_collect(c, col_episodes);
        if (tr->parsed()) return cmd_train(c, agent, episodes, offline);
        if (ev->parsed()) {
            if (ckpts.empty() == run.empty()) throw Error("eval needs either --checkpoint or --run");
            return cmd_eval(c, ckpts, run, eval_episodes);
        }
        if (cmp->parsed()) return cmd_compare(c, runs, eval_episodes);
        if (srv->parsed()) return cmd_serve(c, epochs, port, timeout_ms);
        if (agt->parsed()) return cmd_agent(c, ckpts, host, port, timeout_ms);
    } catch (const std::exception& e) {
        log().error("{}", e.what());
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
