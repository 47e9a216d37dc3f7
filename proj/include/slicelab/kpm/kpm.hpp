#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slicelab/core/types.hpp"
#include "slicelab/ransim/simulator.hpp"

namespace slicelab::kpm {

/// KPMs gathered for one slice over one decision epoch.
struct KpmWindow {
    SliceId slice;
    EpochIndex epoch;
    std::vector<double> latencies_ms;
    std::int64_t tb = 0;
    double rt = 1.0;
    double dl_mbps = 0.0;

    static KpmWindow from_report(const ransim::EpochReport& report, EpochIndex epoch);
};

/// Ratio of granted to requested PRBs; 1 when nothing was requested.
double grant_ratio(std::int64_t granted, std::int64_t requested);

/// Downlink rate in Mbit/s of `bits` delivered over `epoch_len_ms`.
double downlink_mbps(std::int64_t bits, int epoch_len_ms);

/// Fraction of latencies strictly below `lambda_ms`. An empty list counts as
/// fully conforming. Throws Error for a negative latency or lambda <= 0.
double conformance_ratio(std::span<const double> latencies_ms, double lambda_ms);

/// Observation for the agent. Latency statistics are zero for an empty
/// window; SLA fields come from `sla`.
Observation build_observation(const KpmWindow& window, const SlaSpec& sla);

}  // namespace slicelab::kpm
