#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicelab/core/config.hpp"
#include "slicelab/core/sla.hpp"
#include "slicelab/kpm/kpm.hpp"
#include "slicelab/ransim/simulator.hpp"

namespace slicelab::agents {

/// Result of one decision epoch for every controlled slice, in the order of
/// TrainingEnv::controlled().
struct EnvStep {
    std::vector<Observation> obs;
    std::vector<double> rewards;
    std::vector<SlicingAction> applied;  // PRBs actually granted
    bool done = false;
};

class TrainingEnv {
public:
    virtual ~TrainingEnv() = default;

    virtual std::vector<Observation> reset(std::int64_t episode) = 0;
    virtual EnvStep step(std::span<const SlicingAction> actions) = 0;

    virtual std::size_t num_agents() const = 0;
    virtual int num_actions() const = 0;
    virtual int episode_len() const = 0;
    /// Index of the epoch whose observation was returned last.
    virtual std::uint32_t epoch() const = 0;
    virtual const std::vector<SliceId>& controlled() const = 0;
};

/// Episodic environment over the packet simulator. The action chosen from
/// the observation of epoch n is applied during epoch n+1; the reward uses
/// that epoch's measured conformance and its SLA.
class SlicingEnv : public TrainingEnv {
public:
    /// `domain` separates seed streams (e.g. "train" vs "eval").
    SlicingEnv(Config cfg, std::uint64_t seed, std::string domain = "train");

    std::vector<Observation> reset(std::int64_t episode) override;
    /// Starts an episode with every controlled slice pinned to `sla`.
    std::vector<Observation> reset(std::int64_t episode, const std::optional<SlaSpec>& sla);
    EnvStep step(std::span<const SlicingAction> actions) override;

    std::size_t num_agents() const override { return controlled_.size(); }
    int num_actions() const override { return max_action(cfg_.sim.capacity, cfg_.sim.num_slices()); }
    int episode_len() const override { return cfg_.training.episode_len; }
    std::uint32_t epoch() const override { return epoch_; }
    const std::vector<SliceId>& controlled() const override { return controlled_; }

    const Config& config() const { return cfg_; }
    const ransim::Simulator& simulator() const { return *sim_; }
    const SlaTimeline& timeline(SliceId s) const { return timelines_.at(s.index); }
    /// Reports of the last simulated epoch, one per slice.
    const std::vector<ransim::EpochReport>& last_reports() const { return reports_; }
    /// Raises instead of clamping when an action is out of range (default on).
    void set_strict(bool strict) { strict_ = strict; }

private:
    std::vector<Observation> observe_all();

    Config cfg_;
    std::uint64_t seed_;
    std::string domain_;
    std::vector<SliceId> controlled_;
    std::unique_ptr<ransim::Simulator> sim_;
    std::vector<SlaTimeline> timelines_;
    std::vector<ransim::EpochReport> reports_;
    std::uint32_t epoch_ = 0;
    bool strict_ = true;
};

}  // namespace slicelab::agents
