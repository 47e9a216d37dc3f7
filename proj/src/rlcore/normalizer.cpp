#include <algorithm>
#include <cmath>
#include <string>

#include "slicelab/core/types.hpp"
#include "slicelab/rlcore/optim.hpp"

namespace slicelab::rlcore {

RunningNormalizer::RunningNormalizer(std::size_t dim, double clip)
    : clip_(clip), mean_(dim, 0.0), m2_(dim, 0.0) {}

void RunningNormalizer::update(std::span<const double> x) {
    if (frozen_) return;
    if (x.size() != mean_.size()) throw Error("normalizer dimension mismatch");
    // Welford
    count_ += 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - mean_[i];
        mean_[i] += d / count_;
        m2_[i] += d * (x[i] - mean_[i]);
    }
}

std::vector<double> RunningNormalizer::variance() const {
    std::vector<double> v(mean_.size(), 1.0);
    if (count_ > 1.0)
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = m2_[i] / count_;
    return v;
}

void RunningNormalizer::normalize(std::span<const double> x, std::span<double> out) const {
    if (x.size() != mean_.size() || out.size() != x.size()) throw Error("normalizer dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double var = count_ > 1.0 ? m2_[i] / count_ : 1.0;
        const double z = (x[i] - mean_[i]) / std::sqrt(var + 1e-8);
        out[i] = std::clamp(z, -clip_, clip_);
    }
}

std::vector<double> RunningNormalizer::normalize(std::span<const double> x) const {
    std::vector<double> out(x.size());
    normalize(x, out);
    return out;
}

std::vector<double> RunningNormalizer::to_flat() const {
    std::vector<double> flat{count_, clip_};
    flat.insert(flat.end(), mean_.begin(), mean_.end());
    flat.insert(flat.end(), m2_.begin(), m2_.end());
    return flat;
}

RunningNormalizer RunningNormalizer::from_flat(std::span<const double> flat) {
    if (flat.size() < 2 || (flat.size() - 2) % 2 != 0) throw Error("malformed normalizer state");
    const std::size_t dim = (flat.size() - 2) / 2;
    RunningNormalizer n(dim, flat[1]);
    n.count_ = flat[0];
    std::copy_n(flat.begin() + 2, dim, n.mean_.begin());
    std::copy_n(flat.begin() + 2 + dim, dim, n.m2_.begin());
    return n;
}

}  // namespace slicelab::rlcore
