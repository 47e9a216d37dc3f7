#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slicelab/core/types.hpp"

namespace slicelab::controlloop {

inline constexpr int kProtocolVersion = 1;

/// RAN-side KPMs of one slice for one epoch.
struct E2Report {
    EpochIndex epoch;
    SliceId slice;
    std::int64_t tb = 0;
    double rt = 1.0;
    double dl_mbps = 0.0;

    friend bool operator==(const E2Report&, const E2Report&) = default;
};

/// Application-layer latencies of the same (slice, epoch) and the SLA in
/// force for it.
struct A1Enrichment {
    EpochIndex epoch;
    SliceId slice;
    std::vector<double> latencies_ms;
    double lambda_ms = 110.0;
    double phi_sla = 0.99;

    friend bool operator==(const A1Enrichment&, const A1Enrichment&) = default;
};

/// PRB grant for `slice`, effective during `epoch`.
struct ControlMessage {
    EpochIndex epoch;
    SliceId slice;
    SlicingAction prbs;

    friend bool operator==(const ControlMessage&, const ControlMessage&) = default;
};

using Message = std::variant<E2Report, A1Enrichment, ControlMessage>;

class ProtocolError : public Error {
public:
    using Error::Error;
};

/// One JSON object on a single line, without the trailing newline:
///   {"v":1,"type":"E2_REPORT",...}
std::string encode(const Message& m);

/// Inverse of encode. Throws ProtocolError for malformed JSON, an unknown
/// type tag, a version mismatch, or missing fields.
Message decode(std::string_view line);

const char* type_tag(const Message& m);

}  // namespace slicelab::controlloop
