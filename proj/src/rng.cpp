#include "ecsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ecsim {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

RngStream::RngStream(std::uint64_t seed, StreamKind kind, std::uint64_t entity_id) {
    // Fold the three identifiers into one splitmix64 chain; four outputs fill
    // the xoshiro256++ state. splitmix64 is a bijection, so distinct triples
    // cannot collide into the same chain start.
    std::uint64_t x = seed;
    x = splitmix64(x) ^ (static_cast<std::uint64_t>(kind) * 0xD6E8FEB86659FD93ULL);
    x = splitmix64(x) ^ (entity_id * 0xA5A5A5A5A5A5A5A5ULL);
    s_[0] = splitmix64(x);
    s_[1] = splitmix64(x);
    s_[2] = splitmix64(x);
    s_[3] = splitmix64(x);
    // All-zero state would be degenerate; splitmix64 output makes this
    // astronomically unlikely, but guard anyway.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0)
        s_[0] = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform01() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi)
        throw std::invalid_argument("uniform_int: lo > hi");
    const std::uint64_t span = std::uint64_t(hi) - std::uint64_t(lo) + 1;
    if (span == 0) // whole 64-bit range
        return std::int64_t(next_u64());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return std::int64_t(std::uint64_t(lo) + v % span);
}

double RngStream::normal(double mean, double stddev) {
    // Marsaglia polar method. The paired variate is discarded so each call
    // consumes a deterministic, state-independent pattern of draws.
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    return mean + stddev * (u * m);
}

double RngStream::truncated_normal(double mean, double stddev, double lo, double hi) {
    if (!(lo < hi))
        throw std::invalid_argument("truncated_normal: lo must be < hi");
    for (int i = 0; i < 1000000; ++i) {
        const double x = normal(mean, stddev);
        if (x >= lo && x <= hi)
            return x;
    }
    throw std::runtime_error("truncated_normal: rejection bound exceeded; "
                             "interval has negligible mass under N(" +
                             std::to_string(mean) + "," + std::to_string(stddev) + ")");
}

std::int64_t RngStream::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw std::invalid_argument("poisson: mean must be finite and >= 0");
    if (mean == 0.0)
        return 0;
    // Split large means into chunks; Poisson(a+b) = Poisson(a) + Poisson(b).
    std::int64_t total = 0;
    while (mean > 500.0) {
        total += poisson(500.0);
        mean -= 500.0;
    }
    const double limit = std::exp(-mean);
    double prod = 1.0;
    std::int64_t k = 0;
    do {
        ++k;
        prod *= uniform01();
    } while (prod > limit);
    return total + (k - 1);
}

} // namespace ecsim
