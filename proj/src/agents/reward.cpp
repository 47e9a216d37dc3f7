#include "slicelab/agents/reward.hpp"

#include <cmath>
#include <string>

namespace slicelab::agents {

double reward(double phi_sla, double phi_meas, SlicingAction a, int capacity, double k,
              RewardIndicator indicator) {
    if (capacity <= 0) throw Error("capacity must be positive");
    if (a.prbs > capacity)
        throw Error("action of " + std::to_string(a.prbs) + " PRBs exceeds capacity " + std::to_string(capacity));
    if (a.prbs < 0) throw Error("negative PRB action");
    if (!(k > 0.0)) throw Error("sigmoid slope must be positive");

    const double sigmoid = 1.0 / (1.0 + std::exp(k * (phi_sla - phi_meas)));
    const bool gate = indicator == RewardIndicator::corrected ? phi_meas >= phi_sla : phi_meas <= phi_sla;
    const double bonus = gate ? 1.0 - static_cast<double>(a.prbs) / capacity : 0.0;
    return sigmoid + bonus;
}

}  // namespace slicelab::agents
