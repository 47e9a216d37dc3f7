#include "slicelab/harness/runner.hpp"

#include <omp.h>

#include <fstream>

#include "slicelab/agents/env.hpp"
#include "slicelab/agents/factory.hpp"
#include "slicelab/agents/offline.hpp"
#include "slicelab/core/log.hpp"
#include "slicelab/kpm/dataset.hpp"

namespace slicelab::harness {

namespace fs = std::filesystem;
using kpm::format_real;

double metric_value(const SliceMetrics& m, Metric k) {
    switch (k) {
        case Metric::reward: return m.mean_reward;
        case Metric::violation: return m.violation_rate;
        case Metric::prbs: return m.mean_prbs;
    }
    return 0.0;
}

const char* metric_name(Metric k) {
    switch (k) {
        case Metric::reward: return "reward";
        case Metric::violation: return "violation";
        case Metric::prbs: return "prbs";
    }
    return "?";
}

std::vector<EvalPoint> eval_points(const Config& cfg) {
    if (cfg.training.eval_grid.empty()) return {std::nullopt};
    return {cfg.training.eval_grid.begin(), cfg.training.eval_grid.end()};
}

std::string point_label(const EvalPoint& p) {
    if (!p) return "nominal";
    return "lambda" + format_real(p->lambda_ms) + "_phi" + format_real(p->phi_sla);
}

namespace {

// Accumulates per-slice metrics over epochs and episodes.
struct Tally {
    std::vector<double> reward, violations, prbs;
    long epochs = 0;
    int episodes = 0;

    explicit Tally(std::size_t n) : reward(n, 0.0), violations(n, 0.0), prbs(n, 0.0) {}

    void add(const agents::EnvStep& s) {
        for (std::size_t i = 0; i < reward.size(); ++i) {
            reward[i] += s.rewards[i];
            violations[i] += s.obs[i].phi_meas < s.obs[i].phi_sla ? 1.0 : 0.0;
            prbs[i] += s.applied[i].prbs;
        }
        ++epochs;
    }

    std::vector<SliceMetrics> result() const {
        std::vector<SliceMetrics> out(reward.size());
        for (std::size_t i = 0; i < reward.size(); ++i) {
            out[i].mean_reward = reward[i] / std::max(1, episodes);
            out[i].violation_rate = epochs ? violations[i] / static_cast<double>(epochs) : 0.0;
            out[i].mean_prbs = epochs ? prbs[i] / static_cast<double>(epochs) : 0.0;
        }
        return out;
    }
};

}  // namespace

GridMetrics evaluate(const Config& cfg, std::span<const agents::Agent* const> agents, std::uint64_t seed,
                     int episodes) {
    agents::SlicingEnv env(cfg, seed, "eval");
    if (agents.size() != env.num_agents())
        throw Error("evaluation needs " + std::to_string(env.num_agents()) + " agents, got " +
                    std::to_string(agents.size()));
    if (episodes < 1) throw Error("evaluation needs at least one episode");
    Rng rng = Rng::substream("eval/act", seed);
    GridMetrics out;
    for (const auto& point : eval_points(cfg)) {
        Tally tally(agents.size());
        for (int e = 0; e < episodes; ++e) {
            auto obs = env.reset(e, point);
            std::vector<SlicingAction> actions(agents.size());
            for (bool done = false; !done;) {
                for (std::size_t i = 0; i < agents.size(); ++i)
                    actions[i] = agents[i]->act(obs[i], agents::ActMode::greedy, rng);
                auto step = env.step(actions);
                tally.add(step);
                obs = std::move(step.obs);
                done = step.done;
            }
            ++tally.episodes;
        }
        out.push_back(tally.result());
    }
    return out;
}

SeedRun train_seed(const ScenarioSpec& spec, const TrainOptions& opts, std::uint64_t seed) {
    const Config& cfg = spec.config;
    std::unique_ptr<agents::TrainingEnv> env;
    if (opts.offline) {
        env = std::make_unique<agents::OfflineEnv>(cfg, *opts.offline, seed);
    } else {
        env = std::make_unique<agents::SlicingEnv>(cfg, seed, "train");
    }
    const std::size_t n = env->num_agents();
    SeedRun run;
    run.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        run.agents.push_back(agents::make_learner(opts.agent, env->num_actions(), cfg,
                                                  mix_seed(seed) ^ (0x9e3779b97f4a7c15ULL * (i + 1))));
        run.agents.back()->set_step_budget(static_cast<long>(cfg.training.episodes) * cfg.training.episode_len);
    }
    auto borrowed = [&run] {
        std::vector<const agents::Agent*> v;
        for (const auto& a : run.agents) v.push_back(a.get());
        return v;
    };

    const int every = cfg.training.eval_every;
    for (int ep = 0; ep < cfg.training.episodes; ++ep) {
        auto obs = env->reset(ep);
        Tally tally(n);
        std::vector<SlicingAction> actions(n);
        for (bool done = false; !done;) {
            for (std::size_t i = 0; i < n; ++i) actions[i] = run.agents[i]->explore(obs[i]);
            auto step = env->step(actions);
            for (std::size_t i = 0; i < n; ++i) run.agents[i]->observe(step.rewards[i], step.obs[i], step.done);
            tally.add(step);
            obs = std::move(step.obs);
            done = step.done;
        }
        tally.episodes = 1;
        run.training.push_back({ep, tally.result()});
        if (every > 0 && (ep + 1) % every == 0 && ep + 1 < cfg.training.episodes) {
            const auto a = borrowed();
            run.evals.push_back({ep + 1, evaluate(cfg, a, seed, cfg.training.eval_episodes)});
            log().info("{} seed {} episode {}: eval done", opts.agent, seed, ep + 1);
        }
    }
    const auto a = borrowed();
    const int final_eps = opts.final_eval_episodes > 0 ? opts.final_eval_episodes : cfg.training.eval_episodes;
    run.final_eval = evaluate(cfg, a, seed, final_eps);
    run.evals.push_back({cfg.training.episodes, run.final_eval});
    return run;
}

std::vector<SeedRun> run_seeds_serial(const ScenarioSpec& spec, const TrainOptions& opts,
                                      std::span<const std::uint64_t> seeds) {
    std::vector<SeedRun> out;
    for (auto s : seeds) out.push_back(train_seed(spec, opts, s));
    return out;
}

std::vector<SeedRun> run_seeds_parallel(const ScenarioSpec& spec, const TrainOptions& opts,
                                        std::span<const std::uint64_t> seeds) {
    std::vector<SeedRun> out(seeds.size());
    std::vector<std::string> errors(seeds.size());
    const auto n = static_cast<std::int64_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = train_seed(spec, opts, seeds[static_cast<std::size_t>(i)]);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty()) throw Error("seed " + std::to_string(seeds[i]) + ": " + errors[i]);
    return out;
}

MeanCi EvalSummary::stat(std::size_t point, std::size_t slice, Metric m) const {
    const auto v = values(point, slice, m);
    return mean_ci(v);
}

std::vector<double> EvalSummary::values(std::size_t point, std::size_t slice, Metric m) const {
    std::vector<double> v;
    for (const auto& sm : per_seed.at(point).at(slice)) v.push_back(metric_value(sm, m));
    return v;
}

EvalSummary summarize(const std::string& agent, const Config& cfg, std::span<const std::uint64_t> seeds,
                      std::span<const GridMetrics> per_seed) {
    if (seeds.size() != per_seed.size()) throw Error("one evaluation per seed is required");
    EvalSummary s;
    s.agent = agent;
    s.seeds.assign(seeds.begin(), seeds.end());
    s.grid = eval_points(cfg);
    for (int i = 0; i < cfg.sim.num_slices(); ++i)
        if (cfg.sim.slices[static_cast<std::size_t>(i)].controlled)
            s.slices.push_back(SliceId{static_cast<std::uint32_t>(i)});
    s.per_seed.assign(s.grid.size(), std::vector<std::vector<SliceMetrics>>(s.slices.size()));
    for (const auto& g : per_seed) {
        if (g.size() != s.grid.size()) throw Error("evaluation grid size mismatch");
        for (std::size_t p = 0; p < g.size(); ++p) {
            if (g[p].size() != s.slices.size()) throw Error("evaluation slice count mismatch");
            for (std::size_t i = 0; i < g[p].size(); ++i) s.per_seed[p][i].push_back(g[p][i]);
        }
    }
    return s;
}

fs::path checkpoint_path(const fs::path& dir, std::uint64_t seed, SliceId slice) {
    return dir / ("seed" + std::to_string(seed) + "_slice" + std::to_string(slice.index) + ".ckpt");
}

namespace {

std::ofstream open_csv(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

constexpr Metric kMetrics[] = {Metric::reward, Metric::violation, Metric::prbs};

void write_curve(const fs::path& path, const std::vector<double>& xs, const std::vector<std::vector<double>>& ys) {
    auto out = open_csv(path);
    out << "x,mean,ci_lo,ci_hi\n";
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const auto ci = mean_ci(ys[k]);
        out << format_real(xs[k]) << ',' << format_real(ci.mean) << ',' << format_real(ci.lo()) << ','
            << format_real(ci.hi()) << '\n';
    }
}

std::vector<SliceId> controlled_slices(const Config& cfg) {
    std::vector<SliceId> v;
    for (int i = 0; i < cfg.sim.num_slices(); ++i)
        if (cfg.sim.slices[static_cast<std::size_t>(i)].controlled) v.push_back(SliceId{static_cast<std::uint32_t>(i)});
    return v;
}

}  // namespace

void write_training_csv(const fs::path& path, std::span<const SeedRun> runs) {
    auto out = open_csv(path);
    out << "seed,episode,slice,mean_reward,violation_rate,mean_prbs\n";
    for (const auto& r : runs)
        for (const auto& e : r.training)
            for (std::size_t i = 0; i < e.slices.size(); ++i)
                out << r.seed << ',' << e.episode << ',' << i << ',' << format_real(e.slices[i].mean_reward) << ','
                    << format_real(e.slices[i].violation_rate) << ',' << format_real(e.slices[i].mean_prbs) << '\n';
}

void write_evals_csv(const fs::path& path, const Config& cfg, std::span<const SeedRun> runs) {
    const auto points = eval_points(cfg);
    const auto slices = controlled_slices(cfg);
    auto out = open_csv(path);
    out << "seed,after_episodes,point,slice,mean_reward,violation_rate,mean_prbs\n";
    for (const auto& r : runs)
        for (const auto& c : r.evals)
            for (std::size_t p = 0; p < c.metrics.size(); ++p)
                for (std::size_t i = 0; i < c.metrics[p].size(); ++i) {
                    const auto& m = c.metrics[p][i];
                    out << r.seed << ',' << c.after_episodes << ',' << point_label(points[p]) << ','
                        << slices[i].index << ',' << format_real(m.mean_reward) << ','
                        << format_real(m.violation_rate) << ',' << format_real(m.mean_prbs) << '\n';
                }
}

void write_summary_csv(const fs::path& path, const EvalSummary& s) {
    auto out = open_csv(path);
    out << "agent,point,slice,seeds,reward_mean,reward_ci,violation_mean,violation_ci,prbs_mean,prbs_ci\n";
    for (std::size_t p = 0; p < s.grid.size(); ++p)
        for (std::size_t i = 0; i < s.slices.size(); ++i) {
            out << s.agent << ',' << point_label(s.grid[p]) << ',' << s.slices[i].index << ',' << s.seeds.size();
            for (auto m : kMetrics) {
                const auto ci = s.stat(p, i, m);
                out << ',' << format_real(ci.mean) << ',' << format_real(ci.half_width);
            }
            out << '\n';
        }
}

void write_curves(const fs::path& dir, const Config& cfg, std::span<const SeedRun> runs) {
    if (runs.empty()) return;
    fs::create_directories(dir);
    const auto slices = controlled_slices(cfg);
    const auto points = eval_points(cfg);
    for (std::size_t i = 0; i < slices.size(); ++i) {
        for (auto m : kMetrics) {
            std::vector<double> xs;
            std::vector<std::vector<double>> ys;
            for (std::size_t e = 0; e < runs.front().training.size(); ++e) {
                xs.push_back(static_cast<double>(runs.front().training[e].episode));
                std::vector<double> y;
                for (const auto& r : runs) y.push_back(metric_value(r.training.at(e).slices[i], m));
                ys.push_back(std::move(y));
            }
            write_curve(dir / ("train_" + std::string(metric_name(m)) + "_slice" + std::to_string(slices[i].index) +
                               ".csv"),
                        xs, ys);
            for (std::size_t p = 0; p < points.size(); ++p) {
                xs.clear();
                ys.clear();
                for (std::size_t c = 0; c < runs.front().evals.size(); ++c) {
                    xs.push_back(runs.front().evals[c].after_episodes);
                    std::vector<double> y;
                    for (const auto& r : runs) y.push_back(metric_value(r.evals.at(c).metrics[p][i], m));
                    ys.push_back(std::move(y));
                }
                write_curve(dir / ("eval_" + point_label(points[p]) + "_" + metric_name(m) + "_slice" +
                                   std::to_string(slices[i].index) + ".csv"),
                            xs, ys);
            }
        }
    }
}

ScenarioResult run_scenario(const ScenarioSpec& spec, const TrainOptions& opts, const std::optional<fs::path>& out) {
    spec.validate();
    const auto& seeds = spec.config.training.seeds;
    ScenarioResult res;
    res.runs = run_seeds_parallel(spec, opts, seeds);
    std::vector<GridMetrics> finals;
    for (const auto& r : res.runs) finals.push_back(r.final_eval);
    res.summary = summarize(opts.agent, spec.config, seeds, finals);
    if (out) {
        fs::create_directories(*out);
        save_config(spec.config, *out / "config.json");
        write_training_csv(*out / "training.csv", res.runs);
        write_evals_csv(*out / "evals.csv", spec.config, res.runs);
        write_summary_csv(*out / "summary.csv", res.summary);
        write_curves(*out / "curves", spec.config, res.runs);
        const auto slices = controlled_slices(spec.config);
        fs::create_directories(*out / "checkpoints");
        for (const auto& r : res.runs)
            for (std::size_t i = 0; i < r.agents.size(); ++i)
                r.agents[i]->checkpoint().save(checkpoint_path(*out / "checkpoints", r.seed, slices[i]));
    }
    return res;
}

}  // namespace slicelab::harness
