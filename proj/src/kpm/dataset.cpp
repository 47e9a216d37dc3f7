#include "slicelab/kpm/dataset.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <string_view>

namespace slicelab::kpm {

namespace {

constexpr std::size_t kColumns = 14;

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* column) {
    T value{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty())
        throw Error("dataset line " + std::to_string(line) + ": malformed " + column + " field '" +
                    std::string(text) + "'");
    return value;
}

}  // namespace

const std::string& dataset_header() {
    static const std::string header =
        "episode,epoch,slice,tb,rt,dl,d_min,d_max,d_mean,phi_sla,phi_meas,lambda,action,reward";
    return header;
}

std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("cannot format real");
    return std::string(buf.data(), ptr);
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path) : path_(path) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    out_.open(path, std::ios::app);
    if (!out_) throw Error("cannot open dataset for writing: " + path.string());
    if (fresh) out_ << dataset_header() << '\n';
}

DatasetWriter::~DatasetWriter() {
    try {
        close();
    } catch (...) {
    }
}

void DatasetWriter::write_row(std::int64_t episode, std::uint32_t epoch, std::uint32_t slice,
                              const Observation& s, const SlicingAction* action, const double* reward) {
    out_ << episode << ',' << epoch << ',' << slice;
    for (double v : s.to_array()) out_ << ',' << format_real(v);
    out_ << ',';
    if (action) out_ << action->prbs;
    out_ << ',';
    if (reward) out_ << format_real(*reward);
    out_ << '\n';
}

void DatasetWriter::record(const Transition& t) {
    if (closed_) throw Error("dataset writer already closed");
    if (!std::isfinite(t.reward)) throw Error("transition reward must be finite");
    const StreamKey key{t.episode, t.slice.index};

    // A slice that moved to another episode leaves its old tail behind.
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (it->first.second == t.slice.index && it->first.first != t.episode) {
            write_row(it->first.first, it->second.epoch, it->first.second, it->second.state, nullptr, nullptr);
            it = pending_.erase(it);
        } else {
            ++it;
        }
    }
    if (auto it = pending_.find(key); it != pending_.end()) {
        if (!(it->second.epoch == t.epoch.n && it->second.state == t.state))
            write_row(key.first, it->second.epoch, key.second, it->second.state, nullptr, nullptr);
        pending_.erase(it);
    }
    write_row(t.episode, t.epoch.n, t.slice.index, t.state, &t.action, &t.reward);
    pending_[key] = Pending{t.epoch.n + 1, t.next_state};
}

void DatasetWriter::close() {
    if (closed_) return;
    for (const auto& [key, p] : pending_) write_row(key.first, p.epoch, key.second, p.state, nullptr, nullptr);
    pending_.clear();
    out_.flush();
    if (!out_) throw Error("error writing dataset " + path_.string());
    out_.close();
    closed_ = true;
}

std::vector<Transition> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw Error("dataset line 1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != dataset_header())
        throw Error("dataset line 1: unexpected header '" + line + "' (expected '" + dataset_header() + "')");

    struct Row {
        std::int64_t episode;
        std::uint32_t epoch;
        std::uint32_t slice;
        Observation state;
        SlicingAction action;
        double reward;
        std::size_t line;
    };
    std::map<std::pair<std::int64_t, std::uint32_t>, Row> awaiting;
    std::vector<Transition> out;

    std::array<std::string_view, kColumns> fields;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::string_view rest(line);
        std::size_t n = 0;
        while (true) {
            const auto comma = rest.find(',');
            if (n == kColumns) throw Error("dataset line " + std::to_string(line_no) + ": too many fields");
            fields[n++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (n != kColumns)
            throw Error("dataset line " + std::to_string(line_no) + ": expected 14 fields, got " +
                        std::to_string(n));

        Row row;
        row.line = line_no;
        row.episode = parse_field<std::int64_t>(fields[0], line_no, "episode");
        row.epoch = parse_field<std::uint32_t>(fields[1], line_no, "epoch");
        row.slice = parse_field<std::uint32_t>(fields[2], line_no, "slice");
        std::array<double, Observation::kSize> obs{};
        for (std::size_t k = 0; k < Observation::kSize; ++k)
            obs[k] = parse_field<double>(fields[3 + k], line_no, observation_feature_names()[k].c_str());
        row.state = Observation::from_array(obs);
        const bool terminal = fields[12].empty() && fields[13].empty();
        if (!terminal) {
            row.action = SlicingAction{parse_field<int>(fields[12], line_no, "action")};
            row.reward = parse_field<double>(fields[13], line_no, "reward");
        }

        const auto key = std::make_pair(row.episode, row.slice);
        if (auto it = awaiting.find(key); it != awaiting.end()) {
            const Row& prev = it->second;
            if (row.epoch != prev.epoch + 1)
                throw Error("dataset line " + std::to_string(line_no) + ": expected epoch " +
                            std::to_string(prev.epoch + 1) + " after line " + std::to_string(prev.line) +
                            ", got " + std::to_string(row.epoch));
            out.push_back(Transition{prev.state, prev.action, prev.reward, row.state, prev.episode,
                                     EpochIndex{prev.epoch}, SliceId{prev.slice}});
            awaiting.erase(it);
        }
        if (!terminal) awaiting.emplace(key, row);
    }
    if (!awaiting.empty()) {
        const auto& r = awaiting.begin()->second;
        throw Error("dataset line " + std::to_string(r.line) + ": transition has no next-state row");
    }
    return out;
}

void save_dataset(const std::vector<Transition>& ts, const std::filesystem::path& path) {
    std::filesystem::remove(path);
    DatasetWriter w(path);
    for (const auto& t : ts) w.record(t);
    w.close();
}

}  // namespace slicelab::kpm
