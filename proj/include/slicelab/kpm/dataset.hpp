#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "slicelab/core/types.hpp"

namespace slicelab::kpm {

/// Header of the transition CSV, in column order.
const std::string& dataset_header();

/// Append-only CSV recorder. Each transition becomes one row holding its
/// state, action and reward; the next state is the following row of the same
/// (episode, slice) stream. A next state that is not followed by another
/// transition is written as a terminal row with empty action and reward.
class DatasetWriter {
public:
    explicit DatasetWriter(const std::filesystem::path& path);
    ~DatasetWriter();

    DatasetWriter(const DatasetWriter&) = delete;
    DatasetWriter& operator=(const DatasetWriter&) = delete;

    void record(const Transition& t);
    /// Writes pending terminal rows and closes the file. Idempotent.
    void close();

private:
    struct Pending {
        std::uint32_t epoch;
        Observation state;
    };
    using StreamKey = std::pair<std::int64_t, std::uint32_t>;  // (episode, slice)

    void write_row(std::int64_t episode, std::uint32_t epoch, std::uint32_t slice, const Observation& s,
                   const SlicingAction* action, const double* reward);

    std::ofstream out_;
    std::filesystem::path path_;
    std::map<StreamKey, Pending> pending_;
    bool closed_ = false;
};

/// Reads a dataset written by DatasetWriter. Throws Error naming the line
/// for a wrong header, malformed field, or broken stream.
std::vector<Transition> load_dataset(const std::filesystem::path& path);

/// Writes `ts` to `path` (truncating).
void save_dataset(const std::vector<Transition>& ts, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);

}  // namespace slicelab::kpm
