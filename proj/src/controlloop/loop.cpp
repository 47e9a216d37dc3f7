#include "slicelab/controlloop/loop.hpp"

#include "slicelab/agents/env.hpp"
#include "slicelab/core/log.hpp"
#include "slicelab/kpm/kpm.hpp"

namespace slicelab::controlloop {

XApp::XApp(std::map<std::uint32_t, const agents::Agent*> agents, agents::ActMode mode, std::uint64_t seed)
    : agents_(std::move(agents)), mode_(mode), rng_(Rng::substream("xapp", seed)) {}

ControlMessage XApp::on_epoch(const E2Report& e2, const A1Enrichment& a1) {
    if (e2.epoch != a1.epoch || e2.slice != a1.slice)
        throw ProtocolError("E2 report (epoch " + std::to_string(e2.epoch.n) + ", slice " +
                            std::to_string(e2.slice.index) + ") paired with A1 enrichment (epoch " +
                            std::to_string(a1.epoch.n) + ", slice " + std::to_string(a1.slice.index) + ")");
    auto it = agents_.find(e2.slice.index);
    if (it == agents_.end()) throw ProtocolError("no agent for slice " + std::to_string(e2.slice.index));

    kpm::KpmWindow w;
    w.slice = e2.slice;
    w.epoch = e2.epoch;
    w.latencies_ms = a1.latencies_ms;
    w.tb = e2.tb;
    w.rt = e2.rt;
    w.dl_mbps = e2.dl_mbps;
    const auto obs = kpm::build_observation(w, SlaSpec{a1.lambda_ms, a1.phi_sla});
    last_obs_[e2.slice.index] = obs;
    return ControlMessage{EpochIndex{e2.epoch.n + 1}, e2.slice, it->second->act(obs, mode_, rng_)};
}

ControlMessage SocketChannel::exchange(const E2Report& e2, const A1Enrichment& a1) {
    stream_.send_line(encode(e2));
    stream_.send_line(encode(a1));
    auto line = stream_.read_line(timeout_);
    if (!line) throw TransportError("controller closed the connection during epoch " + std::to_string(e2.epoch.n));
    auto msg = decode(*line);
    auto* c = std::get_if<ControlMessage>(&msg);
    if (!c) throw ProtocolError(std::string("expected CONTROL, got ") + type_tag(msg));
    return *c;
}

std::size_t serve_xapp(TcpStream& stream, XApp& xapp, std::chrono::milliseconds timeout) {
    std::size_t sent = 0;
    for (;;) {
        auto first = stream.read_line(timeout);
        if (!first) return sent;
        auto m1 = decode(*first);
        auto* e2 = std::get_if<E2Report>(&m1);
        if (!e2) throw ProtocolError(std::string("expected E2_REPORT, got ") + type_tag(m1));
        auto second = stream.read_line(timeout);
        if (!second) throw TransportError("connection closed between E2_REPORT and A1_ENRICHMENT");
        auto m2 = decode(*second);
        auto* a1 = std::get_if<A1Enrichment>(&m2);
        if (!a1) throw ProtocolError(std::string("expected A1_ENRICHMENT, got ") + type_tag(m2));
        stream.send_line(encode(xapp.on_epoch(*e2, *a1)));
        ++sent;
    }
}

LoopTrace run_closed_loop(const Config& cfg, std::uint64_t seed, ControlChannel& channel, const LoopOptions& opts) {
    if (opts.n_epochs < 1) throw Error("closed loop needs at least one epoch");
    Config c = cfg;
    c.training.episode_len = opts.n_epochs;
    agents::SlicingEnv env(c, seed, "loop");
    env.set_strict(opts.strict);
    auto obs = env.reset(opts.episode, opts.sla);
    const auto& ctrl = env.controlled();

    LoopTrace trace;
    for (std::uint32_t n = 0; n < static_cast<std::uint32_t>(opts.n_epochs); ++n) {
        std::vector<SlicingAction> actions;
        for (std::size_t i = 0; i < ctrl.size(); ++i) {
            const auto& rep = env.last_reports()[ctrl[i].index];
            const auto w = kpm::KpmWindow::from_report(rep, EpochIndex{n});
            const auto sla = env.timeline(ctrl[i]).at(EpochIndex{n});
            const E2Report e2{EpochIndex{n}, ctrl[i], w.tb, w.rt, w.dl_mbps};
            const A1Enrichment a1{EpochIndex{n}, ctrl[i], w.latencies_ms, sla.lambda_ms, sla.phi_sla};
            const auto reply = channel.exchange(e2, a1);
            if (reply.epoch.n != n + 1 || reply.slice != ctrl[i])
                throw ProtocolError("CONTROL for (epoch " + std::to_string(reply.epoch.n) + ", slice " +
                                    std::to_string(reply.slice.index) + ") does not answer (epoch " +
                                    std::to_string(n) + ", slice " + std::to_string(ctrl[i].index) + ")");
            actions.push_back(reply.prbs);
        }
        agents::EnvStep step;
        try {
            step = env.step(actions);
        } catch (const Error& e) {
            throw Error("closed loop aborted at epoch " + std::to_string(n + 1) + ": " + e.what());
        }
        std::vector<int> alloc;
        for (const auto& r : env.last_reports()) alloc.push_back(static_cast<int>(r.prbs_allocated / r.epoch_len_ms));
        trace.allocations.push_back(std::move(alloc));
        for (std::size_t i = 0; i < ctrl.size(); ++i) {
            Transition t;
            t.state = obs[i];
            t.action = step.applied[i];
            t.reward = step.rewards[i];
            t.next_state = step.obs[i];
            t.episode = opts.episode;
            t.epoch = EpochIndex{n};
            t.slice = ctrl[i];
            trace.rows.push_back(t);
            trace.requested.push_back(actions[i]);
        }
        obs = std::move(step.obs);
    }
    log().debug("closed loop finished {} epochs over {} slices", opts.n_epochs, ctrl.size());
    return trace;
}

}  // namespace slicelab::controlloop
