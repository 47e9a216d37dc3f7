#include "slicelab/controlloop/messages.hpp"

#include <json.hpp>

namespace slicelab::controlloop {

using nlohmann::json;

namespace {

struct TagVisitor {
    const char* operator()(const E2Report&) const { return "E2_REPORT"; }
    const char* operator()(const A1Enrichment&) const { return "A1_ENRICHMENT"; }
    const char* operator()(const ControlMessage&) const { return "CONTROL"; }
};

template <class T>
T field(const json& j, const char* key, const char* type) {
    auto it = j.find(key);
    if (it == j.end()) throw ProtocolError(std::string(type) + " message lacks field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ProtocolError(std::string(type) + " field '" + key + "' has the wrong type");
    }
}

}  // namespace

const char* type_tag(const Message& m) { return std::visit(TagVisitor{}, m); }

std::string encode(const Message& m) {
    json j = {{"v", kProtocolVersion}, {"type", type_tag(m)}};
    if (auto* e2 = std::get_if<E2Report>(&m)) {
        j["epoch"] = e2->epoch.n;
        j["slice"] = e2->slice.index;
        j["tb"] = e2->tb;
        j["rt"] = e2->rt;
        j["dl"] = e2->dl_mbps;
    } else if (auto* a1 = std::get_if<A1Enrichment>(&m)) {
        j["epoch"] = a1->epoch.n;
        j["slice"] = a1->slice.index;
        j["latencies_ms"] = a1->latencies_ms;
        j["lambda_ms"] = a1->lambda_ms;
        j["phi_sla"] = a1->phi_sla;
    } else {
        const auto& c = std::get<ControlMessage>(m);
        j["epoch"] = c.epoch.n;
        j["slice"] = c.slice.index;
        j["prbs"] = c.prbs.prbs;
    }
    return j.dump();
}

Message decode(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("malformed message: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("message is not a JSON object");
    const auto v = field<int>(j, "v", "protocol");
    if (v != kProtocolVersion)
        throw ProtocolError("protocol version " + std::to_string(v) + " not supported (expected " +
                            std::to_string(kProtocolVersion) + ")");
    const auto type = field<std::string>(j, "type", "protocol");
    if (type == "E2_REPORT") {
        E2Report m;
        m.epoch.n = field<std::uint32_t>(j, "epoch", "E2_REPORT");
        m.slice.index = field<std::uint32_t>(j, "slice", "E2_REPORT");
        m.tb = field<std::int64_t>(j, "tb", "E2_REPORT");
        m.rt = field<double>(j, "rt", "E2_REPORT");
        m.dl_mbps = field<double>(j, "dl", "E2_REPORT");
        return m;
    }
    if (type == "A1_ENRICHMENT") {
        A1Enrichment m;
        m.epoch.n = field<std::uint32_t>(j, "epoch", "A1_ENRICHMENT");
        m.slice.index = field<std::uint32_t>(j, "slice", "A1_ENRICHMENT");
        m.latencies_ms = field<std::vector<double>>(j, "latencies_ms", "A1_ENRICHMENT");
        m.lambda_ms = field<double>(j, "lambda_ms", "A1_ENRICHMENT");
        m.phi_sla = field<double>(j, "phi_sla", "A1_ENRICHMENT");
        return m;
    }
    if (type == "CONTROL") {
        ControlMessage m;
        m.epoch.n = field<std::uint32_t>(j, "epoch", "CONTROL");
        m.slice.index = field<std::uint32_t>(j, "slice", "CONTROL");
        m.prbs.prbs = field<int>(j, "prbs", "CONTROL");
        return m;
    }
    throw ProtocolError("unknown message type '" + type + "'");
}

}  // namespace slicelab::controlloop
