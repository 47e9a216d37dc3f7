#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "slicelab/harness/runner.hpp"

namespace slicelab::harness {

/// Ratios of one agent's metrics to a reference agent's, per SLA point and
/// slice. Each ratio is taken between seed-averaged means (paired seeds);
/// 0/0 reads as 1.
struct RatioRow {
    std::string agent;
    std::string reference;
    std::string point;
    std::uint32_t slice = 0;
    double violation_ratio = 1.0;
    double prbs_ratio = 1.0;
    double reward_ratio = 1.0;
};

/// Throws Error when the summaries were evaluated on different seeds, SLA
/// points or slices.
std::vector<RatioRow> compare(const EvalSummary& agent, const EvalSummary& reference);

/// Every agent against every other one.
std::vector<RatioRow> compare_all(const std::vector<EvalSummary>& summaries);

void write_comparison_csv(const std::filesystem::path& path, const std::vector<RatioRow>& rows);

}  // namespace slicelab::harness
