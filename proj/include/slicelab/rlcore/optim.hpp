#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace slicelab::rlcore {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One Adam step with bias correction; minimises, i.e. moves against `grads`.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg);

/// Per-feature running mean/variance used to standardise observations.
/// Frozen normalizers ignore update().
class RunningNormalizer {
public:
    RunningNormalizer() = default;
    explicit RunningNormalizer(std::size_t dim, double clip = 5.0);

    void update(std::span<const double> x);
    void normalize(std::span<const double> x, std::span<double> out) const;
    std::vector<double> normalize(std::span<const double> x) const;

    void freeze() { frozen_ = true; }
    void unfreeze() { frozen_ = false; }
    bool frozen() const { return frozen_; }

    std::size_t dim() const { return mean_.size(); }
    double count() const { return count_; }
    const std::vector<double>& mean() const { return mean_; }
    std::vector<double> variance() const;

    /// Flat state [count, clip, mean..., m2...] for checkpoints.
    std::vector<double> to_flat() const;
    static RunningNormalizer from_flat(std::span<const double> flat);

    friend bool operator==(const RunningNormalizer&, const RunningNormalizer&) = default;

private:
    double count_ = 0.0;
    double clip_ = 5.0;
    std::vector<double> mean_;
    std::vector<double> m2_;
    bool frozen_ = false;
};

}  // namespace slicelab::rlcore
