#include "slicelab/ransim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slicelab::ransim {

Micros UeState::next_arrival_us() const {
    return phase_us + static_cast<Micros>(std::llround(static_cast<double>(bursts_emitted) * burst_interval_us));
}

std::vector<double> EpochReport::latencies_ms() const {
    std::vector<double> out;
    out.reserve(delivered.size());
    for (const auto& p : delivered) out.push_back(p.latency_ms(backhaul_ms));
    return out;
}

Simulator::Simulator(SimConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), channel_rng_(Rng::substream("channel", seed)) {
    Rng traffic = Rng::substream("traffic", seed);
    slice_ues_.resize(cfg_.slices.size());
    generated_.assign(cfg_.slices.size(), 0);
    delivered_.assign(cfg_.slices.size(), 0);
    for (std::size_t s = 0; s < cfg_.slices.size(); ++s) {
        const auto& sc = cfg_.slices[s];
        for (int u = 0; u < sc.num_ues; ++u) {
            UeState ue;
            ue.slice = SliceId{static_cast<std::uint32_t>(s)};
            ue.bitrate_mbps = sc.bitrate_mbps;
            ue.packet_bits = static_cast<std::int64_t>(sc.packet_bytes) * 8;
            ue.burst_packets = sc.burst_packets;
            // Mbit/s is bits per microsecond.
            ue.burst_interval_us = sc.bitrate_mbps > 0.0
                ? static_cast<double>(ue.packet_bits * sc.burst_packets) / sc.bitrate_mbps
                : 0.0;
            ue.phase_us = ue.burst_interval_us > 0.0
                ? static_cast<Micros>(std::floor(traffic.uniform() * ue.burst_interval_us))
                : 0;
            double eta = cfg_.eta_init;
            if (cfg_.eta_init_spread > 0.0)
                eta += traffic.uniform(-cfg_.eta_init_spread, cfg_.eta_init_spread);
            ue.efficiency = std::clamp(eta, cfg_.eta_min, cfg_.eta_max);
            slice_ues_[s].push_back(static_cast<std::uint32_t>(ues_.size()));
            ues_.push_back(std::move(ue));
        }
    }
}

std::int64_t Simulator::bits_per_prb(double efficiency) const {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(cfg_.bits_per_prb_scale * efficiency)));
}

std::int64_t Simulator::bits_queued(SliceId s) const {
    std::int64_t total = 0;
    for (auto u : slice_ues_.at(s.index))
        for (const auto& p : ues_[u].queue) total += p.size_bits;
    return total;
}

void Simulator::enqueue_arrivals(Micros until_inclusive) {
    for (auto& ue : ues_) {
        if (ue.burst_interval_us <= 0.0) continue;
        for (Micros t = ue.next_arrival_us(); t <= until_inclusive; t = ue.next_arrival_us()) {
            for (int k = 0; k < ue.burst_packets; ++k) {
                ue.queue.push_back(Packet{t, ue.packet_bits, ue.packet_bits});
                generated_[ue.slice.index] += ue.packet_bits;
            }
            ++ue.bursts_emitted;
        }
    }
}

void Simulator::serve_slice(std::size_t slice, int prbs, EpochReport& report) {
    const auto& members = slice_ues_[slice];
    const std::size_t n = members.size();
    report.prbs_allocated += prbs;
    if (n == 0) return;

    std::vector<int> granted(n, 0);
    std::size_t backlogged = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& ue = ues_[members[k]];
        if (ue.queue.empty()) continue;
        ++backlogged;
        std::int64_t pending = 0;
        for (const auto& p : ue.queue) pending += p.remaining_bits;
        const auto cap = bits_per_prb(ue.efficiency);
        report.prbs_requested += (pending + cap - 1) / cap;
    }

    const Micros departure = now_us_ + kMicrosPerMs;
    std::size_t cursor = static_cast<std::size_t>(tti_count_ % static_cast<std::int64_t>(n));
    int left = prbs;
    while (left > 0 && backlogged > 0) {
        while (ues_[members[cursor]].queue.empty()) cursor = (cursor + 1) % n;
        auto& ue = ues_[members[cursor]];
        std::int64_t budget = bits_per_prb(ue.efficiency);
        while (budget > 0 && !ue.queue.empty()) {
            auto& head = ue.queue.front();
            const auto sent = std::min(budget, head.remaining_bits);
            head.remaining_bits -= sent;
            budget -= sent;
            if (head.remaining_bits == 0) {
                report.delivered.push_back(PacketRecord{ue.slice, members[cursor], head.arrival_us,
                                                        departure, head.size_bits});
                report.bits_delivered += head.size_bits;
                delivered_[slice] += head.size_bits;
                ue.queue.pop_front();
            }
        }
        ++granted[cursor];
        --left;
        if (ue.queue.empty()) --backlogged;
        cursor = (cursor + 1) % n;
    }
    for (int g : granted) {
        report.prbs_granted += g;
        if (g > 0) ++report.tb_count;
    }
}

std::map<SliceId, EpochReport> Simulator::step_epoch(const std::map<SliceId, SlicingAction>& slicing,
                                                     int epoch_len_ms) {
    std::vector<int> prbs(cfg_.slices.size(), 0);
    for (const auto& [slice, action] : slicing) {
        if (slice.index >= prbs.size())
            throw Error("slicing names unknown slice " + std::to_string(slice.index));
        prbs[slice.index] = action.prbs;
    }
    auto reports = step_epoch(prbs, epoch_len_ms);
    std::map<SliceId, EpochReport> out;
    for (auto& r : reports) out.emplace(r.slice, std::move(r));
    return out;
}

std::vector<EpochReport> Simulator::step_epoch(std::span<const int> prbs, int epoch_len_ms) {
    if (prbs.size() != cfg_.slices.size())
        throw Error("expected " + std::to_string(cfg_.slices.size()) + " slice grants, got " +
                    std::to_string(prbs.size()));
    if (epoch_len_ms <= 0) throw Error("epoch length must be positive");
    long total = 0;
    for (int p : prbs) {
        if (p < 0) throw Error("negative PRB grant");
        total += p;
    }
    if (total > cfg_.capacity)
        throw Error("allocation of " + std::to_string(total) + " PRBs exceeds capacity " +
                    std::to_string(cfg_.capacity));

    std::vector<EpochReport> reports(cfg_.slices.size());
    for (std::size_t s = 0; s < reports.size(); ++s) {
        reports[s].slice = SliceId{static_cast<std::uint32_t>(s)};
        reports[s].backhaul_ms = cfg_.backhaul_ms;
        reports[s].epoch_len_ms = epoch_len_ms;
    }
    for (int t = 0; t < epoch_len_ms; ++t) {
        enqueue_arrivals(now_us_);
        for (std::size_t s = 0; s < reports.size(); ++s) serve_slice(s, prbs[s], reports[s]);
        now_us_ += kMicrosPerMs;
        ++tti_count_;
    }
    evolve_channel();
    return reports;
}

void Simulator::evolve_channel() {
    for (auto& ue : ues_) {
        const double step = channel_rng_.normal(0.0, cfg_.eta_sigma);
        ue.efficiency = std::clamp(ue.efficiency + step, cfg_.eta_min, cfg_.eta_max);
    }
}

std::vector<int> resolve_allocation(const std::map<SliceId, SlicingAction>& controlled, int capacity,
                                    int num_slices) {
    std::vector<int> out(static_cast<std::size_t>(num_slices), 0);
    std::vector<std::size_t> free_slices;
    for (int s = 0; s < num_slices; ++s)
        if (!controlled.count(SliceId{static_cast<std::uint32_t>(s)})) free_slices.push_back(s);

    const int budget = capacity - static_cast<int>(free_slices.size());
    long requested = 0;
    for (const auto& [slice, a] : controlled) {
        if (slice.index >= out.size()) throw Error("action for unknown slice " + std::to_string(slice.index));
        if (a.prbs < 1) throw Error("action must grant at least one PRB");
        requested += a.prbs;
    }
    if (requested <= budget) {
        for (const auto& [slice, a] : controlled) out[slice.index] = a.prbs;
    } else {
        int used = 0;
        for (const auto& [slice, a] : controlled) {
            const int scaled = static_cast<int>(static_cast<long>(a.prbs) * budget / requested);
            out[slice.index] = std::max(1, scaled);
            used += out[slice.index];
        }
        // Bumping zeros to one can overshoot; trim the largest grants.
        while (used > budget) {
            auto it = std::max_element(out.begin(), out.end());
            --*it;
            --used;
        }
    }

    if (!free_slices.empty()) {
        const int used = std::accumulate(out.begin(), out.end(), 0);
        const int leftover = capacity - used;
        const int share = leftover / static_cast<int>(free_slices.size());
        int rem = leftover % static_cast<int>(free_slices.size());
        for (auto s : free_slices) out[s] = share + (rem-- > 0 ? 1 : 0);
    }
    return out;
}

}  // namespace slicelab::ransim
