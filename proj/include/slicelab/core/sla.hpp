#pragma once

#include <vector>

#include "slicelab/core/config.hpp"
#include "slicelab/core/rng.hpp"
#include "slicelab/core/types.hpp"

namespace slicelab {

/// SLA in force for one slice over one episode: a base SLA plus step
/// changes taking effect at given epochs.
class SlaTimeline {
public:
    SlaTimeline() = default;
    explicit SlaTimeline(SlaSpec base) : base_(base) { base_.validate(); }

    /// Realises a schedule for one episode; draws lambda when randomised.
    static SlaTimeline draw(const SlaScheduleConfig& cfg, Rng& rng);

    void add_step(EpochIndex from, SlaSpec sla);
    SlaSpec at(EpochIndex n) const;
    const SlaSpec& base() const { return base_; }

private:
    SlaSpec base_;
    std::vector<std::pair<EpochIndex, SlaSpec>> steps_;  // sorted by epoch
};

}  // namespace slicelab
