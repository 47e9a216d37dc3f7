#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "slicelab/core/config.hpp"
#include "slicelab/core/rng.hpp"
#include "slicelab/core/types.hpp"

namespace slicelab::ransim {

struct Packet {
    Micros arrival_us = 0;
    std::int64_t size_bits = 0;
    std::int64_t remaining_bits = 0;
};

struct UeState {
    SliceId slice;
    double bitrate_mbps = 0.0;
    double efficiency = 1.0;
    std::deque<Packet> queue;  // FIFO, ordered by arrival
    std::int64_t bursts_emitted = 0;
    Micros phase_us = 0;
    double burst_interval_us = 0.0;
    int burst_packets = 1;
    std::int64_t packet_bits = 0;

    Micros next_arrival_us() const;
};

struct PacketRecord {
    SliceId slice;
    std::uint32_t ue = 0;
    Micros arrival_us = 0;
    Micros departure_us = 0;
    std::int64_t size_bits = 0;

    double latency_ms(double backhaul_ms) const {
        return static_cast<double>(departure_us - arrival_us) / kMicrosPerMs + backhaul_ms;
    }

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

struct EpochReport {
    SliceId slice;
    std::vector<PacketRecord> delivered;
    std::int64_t tb_count = 0;
    std::int64_t prbs_requested = 0;
    std::int64_t prbs_granted = 0;
    /// PRBs the slicing policy made available (granted plus idle).
    std::int64_t prbs_allocated = 0;
    std::int64_t bits_delivered = 0;
    double backhaul_ms = 0.0;
    int epoch_len_ms = 0;

    std::vector<double> latencies_ms() const;

    friend bool operator==(const EpochReport&, const EpochReport&) = default;
};

/// Packet-level model of one base station shared by several slices. Time
/// advances in 1 ms TTIs; every TTI each slice drains at most its PRB share
/// from its UEs' queues, visiting UEs round-robin.
class Simulator {
public:
    Simulator(SimConfig cfg, std::uint64_t seed);

    /// Runs `epoch_len_ms` TTIs with the given per-slice PRB grants. Slices
    /// absent from the map get no PRBs. Throws Error when the grants exceed
    /// the cell capacity or name an unknown slice.
    std::map<SliceId, EpochReport> step_epoch(const std::map<SliceId, SlicingAction>& slicing,
                                              int epoch_len_ms);

    /// Same as above with one grant per slice, in slice order.
    std::vector<EpochReport> step_epoch(std::span<const int> prbs, int epoch_len_ms);

    /// Bounded random walk of every UE's spectral efficiency.
    void evolve_channel();

    Micros now() const { return now_us_; }
    const SimConfig& config() const { return cfg_; }
    const std::vector<UeState>& ues() const { return ues_; }

    std::int64_t bits_generated(SliceId s) const { return generated_.at(s.index); }
    std::int64_t bits_delivered(SliceId s) const { return delivered_.at(s.index); }
    std::int64_t bits_queued(SliceId s) const;

    /// Bits carried by one PRB in one TTI for a UE with the given efficiency.
    std::int64_t bits_per_prb(double efficiency) const;

private:
    void enqueue_arrivals(Micros until_inclusive);
    void serve_slice(std::size_t slice, int prbs, EpochReport& report);

    SimConfig cfg_;
    Rng channel_rng_;
    Micros now_us_ = 0;
    std::int64_t tti_count_ = 0;
    std::vector<UeState> ues_;
    std::vector<std::vector<std::uint32_t>> slice_ues_;
    std::vector<std::int64_t> generated_;
    std::vector<std::int64_t> delivered_;
};

/// Expands the controlled slices' actions into a full per-slice grant.
/// When controlled actions exceed what the cell can give them, they are
/// scaled down proportionally and floored (each keeps at least one PRB).
/// Leftover PRBs are split evenly among uncontrolled slices, remainder to
/// the lowest indices.
std::vector<int> resolve_allocation(const std::map<SliceId, SlicingAction>& controlled,
                                    int capacity, int num_slices);

}  // namespace slicelab::ransim
