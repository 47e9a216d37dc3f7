#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicelab/agents/agent.hpp"
#include "slicelab/harness/scenario.hpp"
#include "slicelab/harness/stats.hpp"

namespace slicelab::harness {

struct SliceMetrics {
    double mean_reward = 0.0;     // per-episode reward sum, averaged over episodes
    double violation_rate = 0.0;  // fraction of epochs with phi_meas < phi_sla
    double mean_prbs = 0.0;       // PRBs applied, averaged over epochs

    friend bool operator==(const SliceMetrics&, const SliceMetrics&) = default;
};

enum class Metric { reward, violation, prbs };
double metric_value(const SliceMetrics& m, Metric k);
const char* metric_name(Metric k);

/// An evaluation SLA pinned on every controlled slice, or nullopt for the
/// slices' own schedules.
using EvalPoint = std::optional<SlaSpec>;

std::vector<EvalPoint> eval_points(const Config& cfg);
std::string point_label(const EvalPoint& p);

/// Metrics indexed [point][controlled slice].
using GridMetrics = std::vector<std::vector<SliceMetrics>>;

/// Greedy evaluation, one agent per controlled slice, over `episodes`
/// episodes whose randomness depends only on (`seed`, episode index).
GridMetrics evaluate(const Config& cfg, std::span<const agents::Agent* const> agents, std::uint64_t seed,
                     int episodes);

struct EpisodeMetrics {
    std::int64_t episode = 0;
    std::vector<SliceMetrics> slices;
};

struct EvalCheck {
    int after_episodes = 0;
    GridMetrics metrics;
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<std::unique_ptr<agents::Learner>> agents;  // one per controlled slice
    std::vector<EpisodeMetrics> training;                  // behaviour policy
    std::vector<EvalCheck> evals;                          // periodic greedy checks
    GridMetrics final_eval;
};

struct TrainOptions {
    std::string agent = "ppo";
    /// When set, training samples transitions from this dataset instead of
    /// running the simulator.
    const std::vector<Transition>* offline = nullptr;
    /// Episodes of the final evaluation; <= 0 uses training.eval_episodes.
    int final_eval_episodes = 0;
};

SeedRun train_seed(const ScenarioSpec& spec, const TrainOptions& opts, std::uint64_t seed);

/// Reference: seeds one after another.
std::vector<SeedRun> run_seeds_serial(const ScenarioSpec& spec, const TrainOptions& opts,
                                      std::span<const std::uint64_t> seeds);
/// Seeds in parallel (OpenMP). Output equals run_seeds_serial.
std::vector<SeedRun> run_seeds_parallel(const ScenarioSpec& spec, const TrainOptions& opts,
                                        std::span<const std::uint64_t> seeds);

/// Per-agent evaluation over seeds and SLA points.
struct EvalSummary {
    std::string agent;
    std::vector<std::uint64_t> seeds;
    std::vector<EvalPoint> grid;
    std::vector<SliceId> slices;
    /// [point][slice][seed]
    std::vector<std::vector<std::vector<SliceMetrics>>> per_seed;

    MeanCi stat(std::size_t point, std::size_t slice, Metric m) const;
    std::vector<double> values(std::size_t point, std::size_t slice, Metric m) const;
};

EvalSummary summarize(const std::string& agent, const Config& cfg, std::span<const std::uint64_t> seeds,
                      std::span<const GridMetrics> per_seed);

struct ScenarioResult {
    std::vector<SeedRun> runs;
    EvalSummary summary;
};

/// Trains on every configured seed, evaluates, and when `out` is set writes
///   config.json, training.csv, evals.csv, summary.csv, curves/*.csv and
///   checkpoints/seed<s>_slice<i>.ckpt
ScenarioResult run_scenario(const ScenarioSpec& spec, const TrainOptions& opts,
                            const std::optional<std::filesystem::path>& out);

void write_training_csv(const std::filesystem::path& path, std::span<const SeedRun> runs);
void write_evals_csv(const std::filesystem::path& path, const Config& cfg, std::span<const SeedRun> runs);
void write_summary_csv(const std::filesystem::path& path, const EvalSummary& s);
/// One file per curve with columns x,mean,ci_lo,ci_hi; mean and interval
/// across seeds.
void write_curves(const std::filesystem::path& dir, const Config& cfg, std::span<const SeedRun> runs);

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint64_t seed, SliceId slice);

}  // namespace slicelab::harness
