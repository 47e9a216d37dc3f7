#include "slicelab/rlcore/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "slicelab/core/types.hpp"

namespace slicelab::rlcore {

namespace {

constexpr std::string_view kMagic = "SLICELAB-CHECKPOINT";

void put_double(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_double(std::string_view in, std::size_t pos) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void Checkpoint::add_net(const std::string& name, const DenseNet& net) {
    blocks.push_back({name, net.arch().to_json(), {net.params().begin(), net.params().end()}});
}

void Checkpoint::add_values(const std::string& name, std::vector<double> values) {
    blocks.push_back({name, nullptr, std::move(values)});
}

const ParamBlock& Checkpoint::block(const std::string& name) const {
    for (const auto& b : blocks)
        if (b.name == name) return b;
    throw Error("checkpoint has no block named '" + name + "'");
}

bool Checkpoint::has_block(const std::string& name) const {
    for (const auto& b : blocks)
        if (b.name == name) return true;
    return false;
}

DenseNet Checkpoint::net(const std::string& name) const {
    const auto& b = block(name);
    if (b.arch.is_null()) throw Error("checkpoint block '" + name + "' is not a network");
    return DenseNet(PolicyParams{Architecture::from_json(b.arch), b.values});
}

std::string Checkpoint::serialize() const {
    nlohmann::json header = meta;
    nlohmann::json dir = nlohmann::json::array();
    for (const auto& b : blocks) dir.push_back({{"name", b.name}, {"arch", b.arch}, {"count", b.values.size()}});
    header["blocks"] = dir;

    std::string out(kMagic);
    out += ' ';
    out += std::to_string(kVersion);
    out += '\n';
    out += header.dump();
    out += '\n';
    for (const auto& b : blocks)
        for (double v : b.values) put_double(out, v);
    return out;
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
    const auto nl1 = bytes.find('\n');
    if (nl1 == std::string_view::npos || bytes.substr(0, kMagic.size()) != kMagic)
        throw Error("not a checkpoint file");
    const auto version_text = bytes.substr(kMagic.size() + 1, nl1 - kMagic.size() - 1);
    if (version_text != std::to_string(kVersion))
        throw Error("unsupported checkpoint version '" + std::string(version_text) + "'");
    const auto nl2 = bytes.find('\n', nl1 + 1);
    if (nl2 == std::string_view::npos) throw Error("truncated checkpoint header");

    Checkpoint c;
    try {
        c.meta = nlohmann::json::parse(bytes.substr(nl1 + 1, nl2 - nl1 - 1));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed checkpoint metadata: ") + e.what());
    }
    const auto dir = c.meta.at("blocks");
    c.meta.erase("blocks");

    std::size_t pos = nl2 + 1;
    for (const auto& d : dir) {
        ParamBlock b;
        b.name = d.at("name").get<std::string>();
        b.arch = d.at("arch");
        const auto count = d.at("count").get<std::size_t>();
        if (pos + count * 8 > bytes.size()) throw Error("truncated checkpoint block '" + b.name + "'");
        b.values.resize(count);
        for (std::size_t i = 0; i < count; ++i, pos += 8) b.values[i] = get_double(bytes, pos);
        c.blocks.push_back(std::move(b));
    }
    if (pos != bytes.size()) throw Error("trailing bytes after checkpoint blocks");
    return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    const auto bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("error writing checkpoint " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

}  // namespace slicelab::rlcore
