#include "slicelab/core/rng.hpp"

namespace slicelab {

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_domain(std::string_view domain) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : domain) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng::Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

Rng Rng::substream(std::string_view domain, std::uint64_t seed) {
    return Rng(mix_seed(seed) ^ hash_domain(domain));
}

Rng Rng::substream(std::string_view domain, std::uint64_t seed, std::uint64_t index) {
    return Rng(mix_seed(mix_seed(seed) ^ hash_domain(domain)) + mix_seed(index + 1));
}

Rng Rng::split(std::string_view domain) {
    return Rng(next_u64() ^ hash_domain(domain));
}

double Rng::uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double Rng::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

int Rng::uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
}

double Rng::normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(engine_);
}

}  // namespace slicelab
