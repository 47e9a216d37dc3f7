#include "slicelab/kpm/kpm.hpp"

#include <algorithm>
#include <cmath>

namespace slicelab::kpm {

KpmWindow KpmWindow::from_report(const ransim::EpochReport& report, EpochIndex epoch) {
    KpmWindow w;
    w.slice = report.slice;
    w.epoch = epoch;
    w.latencies_ms = report.latencies_ms();
    w.tb = report.tb_count;
    w.rt = grant_ratio(report.prbs_granted, report.prbs_requested);
    w.dl_mbps = downlink_mbps(report.bits_delivered, report.epoch_len_ms);
    return w;
}

double grant_ratio(std::int64_t granted, std::int64_t requested) {
    if (requested <= 0) return 1.0;
    return std::min(1.0, static_cast<double>(granted) / static_cast<double>(requested));
}

double downlink_mbps(std::int64_t bits, int epoch_len_ms) {
    if (epoch_len_ms <= 0) throw Error("epoch length must be positive");
    return static_cast<double>(bits) / (static_cast<double>(epoch_len_ms) * kMicrosPerMs);
}

double conformance_ratio(std::span<const double> latencies_ms, double lambda_ms) {
    if (!(lambda_ms > 0.0)) throw Error("latency bound must be positive");
    if (latencies_ms.empty()) return 1.0;
    std::size_t below = 0;
    for (double d : latencies_ms) {
        if (d < 0.0 || std::isnan(d)) throw Error("corrupt latency record: " + std::to_string(d));
        if (d < lambda_ms) ++below;
    }
    return static_cast<double>(below) / static_cast<double>(latencies_ms.size());
}

Observation build_observation(const KpmWindow& window, const SlaSpec& sla) {
    Observation o;
    o.tb = static_cast<double>(window.tb);
    o.rt = window.rt;
    o.dl = window.dl_mbps;
    if (!window.latencies_ms.empty()) {
        const auto [lo, hi] = std::minmax_element(window.latencies_ms.begin(), window.latencies_ms.end());
        double sum = 0.0;
        for (double d : window.latencies_ms) sum += d;
        o.d_min_ms = *lo;
        o.d_max_ms = *hi;
        o.d_mean_ms = sum / static_cast<double>(window.latencies_ms.size());
        // Summation rounding must not break d_min <= d_mean <= d_max.
        o.d_mean_ms = std::clamp(o.d_mean_ms, o.d_min_ms, o.d_max_ms);
    }
    o.phi_sla = sla.phi_sla;
    o.phi_meas = conformance_ratio(window.latencies_ms, sla.lambda_ms);
    o.lambda_ms = sla.lambda_ms;
    return o;
}

}  // namespace slicelab::kpm
