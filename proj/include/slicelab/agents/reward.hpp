#pragma once

#include "slicelab/core/types.hpp"

namespace slicelab::agents {

/// Per-epoch reward: a sigmoid of the gap between required and measured
/// conformance, plus a resource-saving bonus (1 - a/C) gated by an SLA
/// indicator. `corrected` pays the bonus when phi_meas >= phi_sla;
/// `as_written` pays it when phi_meas <= phi_sla.
/// Throws Error when a > C, a < 0, or k <= 0.
double reward(double phi_sla, double phi_meas, SlicingAction a, int capacity, double k,
              RewardIndicator indicator = RewardIndicator::corrected);

}  // namespace slicelab::agents
