#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "slicelab/agents/agent.hpp"
#include "slicelab/controlloop/messages.hpp"
#include "slicelab/controlloop/transport.hpp"
#include "slicelab/core/config.hpp"

namespace slicelab::controlloop {

/// Controller side of the loop: turns each (E2, A1) pair into an
/// observation and asks the slice's agent for the grant of the next epoch.
class XApp {
public:
    /// `agents` maps slice index to a borrowed agent; they must outlive the
    /// XApp.
    XApp(std::map<std::uint32_t, const agents::Agent*> agents, agents::ActMode mode, std::uint64_t seed);

    /// Throws ProtocolError when the two reports disagree on (epoch, slice)
    /// or the slice has no agent.
    ControlMessage on_epoch(const E2Report& e2, const A1Enrichment& a1);

    const Observation& last_observation(SliceId s) const { return last_obs_.at(s.index); }

private:
    std::map<std::uint32_t, const agents::Agent*> agents_;
    agents::ActMode mode_;
    Rng rng_;
    std::map<std::uint32_t, Observation> last_obs_;
};

/// RAN-side view of the controller.
class ControlChannel {
public:
    virtual ~ControlChannel() = default;
    virtual ControlMessage exchange(const E2Report& e2, const A1Enrichment& a1) = 0;
};

class InProcessChannel : public ControlChannel {
public:
    explicit InProcessChannel(XApp& xapp) : xapp_(xapp) {}
    ControlMessage exchange(const E2Report& e2, const A1Enrichment& a1) override { return xapp_.on_epoch(e2, a1); }

private:
    XApp& xapp_;
};

/// Sends E2_REPORT then A1_ENRICHMENT and waits for one CONTROL line.
class SocketChannel : public ControlChannel {
public:
    explicit SocketChannel(TcpStream& stream, std::chrono::milliseconds timeout = kDefaultTimeout)
        : stream_(stream), timeout_(timeout) {}
    ControlMessage exchange(const E2Report& e2, const A1Enrichment& a1) override;

private:
    TcpStream& stream_;
    std::chrono::milliseconds timeout_;
};

/// Answers report pairs from `stream` until the peer closes the connection.
/// Returns the number of CONTROL messages sent.
std::size_t serve_xapp(TcpStream& stream, XApp& xapp, std::chrono::milliseconds timeout = kDefaultTimeout);

struct LoopOptions {
    int n_epochs = 100;
    std::int64_t episode = 0;
    /// Abort on an invalid action; otherwise clamp it and log a warning.
    bool strict = true;
    /// Pins every controlled slice to this SLA instead of its schedule.
    std::optional<SlaSpec> sla;
};

struct LoopTrace {
    /// One row per (epoch, controlled slice), epoch-major.
    std::vector<Transition> rows;
    /// Grants requested by the controller, aligned with `rows`.
    std::vector<SlicingAction> requested;
    /// Full per-slice PRB split applied in each epoch 1..n_epochs.
    std::vector<std::vector<int>> allocations;
};

/// Runs the simulator for epochs 0..n_epochs. After each epoch n the RAN
/// sends the reports of every controlled slice through `channel`; the
/// returned grants are applied during epoch n+1. Epoch 0 uses an even split.
LoopTrace run_closed_loop(const Config& cfg, std::uint64_t seed, ControlChannel& channel, const LoopOptions& opts);

}  // namespace slicelab::controlloop
