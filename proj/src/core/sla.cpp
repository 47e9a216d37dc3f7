#include "slicelab/core/sla.hpp"

#include <algorithm>

namespace slicelab {

SlaTimeline SlaTimeline::draw(const SlaScheduleConfig& cfg, Rng& rng) {
    SlaSpec base{cfg.lambda_ms, cfg.phi_sla};
    if (cfg.randomize_lambda) base.lambda_ms = rng.uniform(cfg.lambda_lo_ms, cfg.lambda_hi_ms);
    SlaTimeline t(base);
    for (const auto& s : cfg.steps) t.add_step(EpochIndex{s.epoch}, SlaSpec{s.lambda_ms, s.phi_sla});
    return t;
}

void SlaTimeline::add_step(EpochIndex from, SlaSpec sla) {
    sla.validate();
    auto it = std::upper_bound(steps_.begin(), steps_.end(), from,
                               [](EpochIndex e, const auto& s) { return e < s.first; });
    steps_.insert(it, {from, sla});
}

SlaSpec SlaTimeline::at(EpochIndex n) const {
    SlaSpec current = base_;
    for (const auto& [from, sla] : steps_) {
        if (from > n) break;
        current = sla;
    }
    return current;
}

}  // namespace slicelab
