#pragma once

#include <string>

#include "slicelab/core/config.hpp"

namespace slicelab::harness {

/// A named experiment: slices, SLA schedules, evaluation grid, training
/// budget and seeds, all carried by the config.
struct ScenarioSpec {
    std::string name;
    Config config;

    /// Throws Error for a bad config, an empty randomisation range, or an
    /// evaluation point outside a controlled slice's training range.
    void validate() const;
};

/// Two controlled slices with fixed SLAs (110 ms, 0.99) and (50 ms, 0.99).
ScenarioSpec stat_scenario();

/// One controlled slice whose latency bound is drawn per episode from
/// U[10, 110] ms with phi = 0.9; evaluated at 30 ms and 110 ms.
ScenarioSpec dyn_scenario();

/// "stat", "dyn" or "custom:<config path>".
ScenarioSpec scenario_from_name(const std::string& name);

}  // namespace slicelab::harness
