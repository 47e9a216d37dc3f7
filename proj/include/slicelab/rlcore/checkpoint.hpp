#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slicelab/rlcore/dense_net.hpp"

namespace slicelab::rlcore {

/// Named parameter block. Network blocks carry their architecture; other
/// blocks (normalizer state, tables) leave `arch` null.
struct ParamBlock {
    std::string name;
    nlohmann::json arch;
    std::vector<double> values;

    friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

/// Checkpoint file:
///   line 1: "SLICELAB-CHECKPOINT <version>"
///   line 2: compact JSON metadata, including the block directory
///   then each block's doubles, little-endian IEEE-754, back to back.
class Checkpoint {
public:
    static constexpr int kVersion = 1;

    nlohmann::json meta = nlohmann::json::object();
    std::vector<ParamBlock> blocks;

    void add_net(const std::string& name, const DenseNet& net);
    void add_values(const std::string& name, std::vector<double> values);

    const ParamBlock& block(const std::string& name) const;
    bool has_block(const std::string& name) const;
    DenseNet net(const std::string& name) const;

    std::string serialize() const;
    static Checkpoint deserialize(std::string_view bytes);

    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

}  // namespace slicelab::rlcore
