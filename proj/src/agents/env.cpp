#include "slicelab/agents/env.hpp"

#include <algorithm>
#include <map>

#include "slicelab/agents/reward.hpp"
#include "slicelab/core/log.hpp"

namespace slicelab::agents {

SlicingEnv::SlicingEnv(Config cfg, std::uint64_t seed, std::string domain)
    : cfg_(std::move(cfg)), seed_(seed), domain_(std::move(domain)) {
    cfg_.validate();
    for (int s = 0; s < cfg_.sim.num_slices(); ++s)
        if (cfg_.sim.slices[s].controlled) controlled_.push_back(SliceId{static_cast<std::uint32_t>(s)});
}

std::vector<Observation> SlicingEnv::reset(std::int64_t episode) { return reset(episode, std::nullopt); }

std::vector<Observation> SlicingEnv::reset(std::int64_t episode, const std::optional<SlaSpec>& sla) {
    const auto ep = static_cast<std::uint64_t>(episode);
    sim_ = std::make_unique<ransim::Simulator>(cfg_.sim, Rng::substream(domain_ + "/sim", seed_, ep).next_u64());
    Rng sla_rng = Rng::substream(domain_ + "/sla", seed_, ep);
    timelines_.clear();
    for (const auto& slice : cfg_.sim.slices) {
        auto t = SlaTimeline::draw(slice.sla, sla_rng);
        if (sla && slice.controlled) t = SlaTimeline(*sla);
        timelines_.push_back(std::move(t));
    }
    const auto initial = ransim::resolve_allocation({}, cfg_.sim.capacity, cfg_.sim.num_slices());
    reports_ = sim_->step_epoch(initial, cfg_.sim.epoch_len_ms);
    epoch_ = 0;
    return observe_all();
}

std::vector<Observation> SlicingEnv::observe_all() {
    std::vector<Observation> out;
    out.reserve(controlled_.size());
    for (auto s : controlled_) {
        const auto window = kpm::KpmWindow::from_report(reports_[s.index], EpochIndex{epoch_});
        out.push_back(kpm::build_observation(window, timelines_[s.index].at(EpochIndex{epoch_})));
    }
    return out;
}

EnvStep SlicingEnv::step(std::span<const SlicingAction> actions) {
    if (!sim_) throw Error("environment stepped before reset");
    if (epoch_ >= static_cast<std::uint32_t>(cfg_.training.episode_len)) throw Error("episode already finished");
    if (actions.size() != controlled_.size())
        throw Error("expected " + std::to_string(controlled_.size()) + " actions, got " +
                    std::to_string(actions.size()));

    const int hi = num_actions();
    std::map<SliceId, SlicingAction> slicing;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        SlicingAction a = actions[i];
        if (strict_) {
            validate_action(a, cfg_.sim.capacity, cfg_.sim.num_slices());
        } else if (a.prbs < 1 || a.prbs > hi) {
            log().warn("clamping action {} for slice {} into [1, {}]", a.prbs, controlled_[i].index, hi);
            a.prbs = std::clamp(a.prbs, 1, hi);
        }
        slicing[controlled_[i]] = a;
    }
    const auto alloc = ransim::resolve_allocation(slicing, cfg_.sim.capacity, cfg_.sim.num_slices());
    reports_ = sim_->step_epoch(alloc, cfg_.sim.epoch_len_ms);
    ++epoch_;

    EnvStep out;
    out.obs = observe_all();
    for (std::size_t i = 0; i < controlled_.size(); ++i) {
        const SlicingAction applied{alloc[controlled_[i].index]};
        out.applied.push_back(applied);
        out.rewards.push_back(reward(out.obs[i].phi_sla, out.obs[i].phi_meas, applied, cfg_.sim.capacity,
                                     cfg_.reward.k, cfg_.reward.indicator));
    }
    out.done = epoch_ >= static_cast<std::uint32_t>(cfg_.training.episode_len);
    return out;
}

}  // namespace slicelab::agents
