#include "slicelab/core/types.hpp"

#include <cmath>

namespace slicelab {

void SlaSpec::validate() const {
    if (!(lambda_ms > 0.0) || !std::isfinite(lambda_ms))
        throw Error("SLA latency bound must be positive, got " + std::to_string(lambda_ms));
    if (!(phi_sla > 0.0 && phi_sla <= 1.0))
        throw Error("SLA tolerance must lie in (0, 1], got " + std::to_string(phi_sla));
}

void validate_action(SlicingAction a, int capacity, int num_slices) {
    const int hi = max_action(capacity, num_slices);
    if (a.prbs < 1 || a.prbs > hi)
        throw Error("action of " + std::to_string(a.prbs) + " PRBs outside [1, " +
                    std::to_string(hi) + "]");
}

std::array<double, Observation::kSize> Observation::to_array() const {
    return {tb, rt, dl, d_min_ms, d_max_ms, d_mean_ms, phi_sla, phi_meas, lambda_ms};
}

Observation Observation::from_array(std::span<const double> v) {
    if (v.size() != kSize)
        throw Error("observation vector must have 9 entries, got " + std::to_string(v.size()));
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
}

const std::array<std::string, Observation::kSize>& observation_feature_names() {
    static const std::array<std::string, Observation::kSize> names = {
        "tb", "rt", "dl", "d_min", "d_max", "d_mean", "phi_sla", "phi_meas", "lambda"};
    return names;
}

RewardIndicator parse_reward_indicator(const std::string& s) {
    if (s == "as-written") return RewardIndicator::as_written;
    if (s == "corrected") return RewardIndicator::corrected;
    throw Error("unknown reward indicator '" + s + "' (expected as-written or corrected)");
}

std::string to_string(RewardIndicator r) {
    return r == RewardIndicator::as_written ? "as-written" : "corrected";
}

}  // namespace slicelab
