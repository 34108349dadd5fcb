#pragma once

#include <cstdint>
#include <string>

namespace ecsim {

/// Stream labels keep independent actors on independent random sequences.
/// A purse draws its own purchases from its own stream, so adding a new
/// segment or reordering a loop never disturbs anyone else's draws.
enum class StreamKind : std::uint64_t {
    purse_activity = 1,
    segment_population = 2,
    attack = 3,
    member_ops = 4,
    engine_misc = 5,
};

/// Counter-based seeding: seed, stream kind and entity id are mixed through
/// splitmix64 to fill xoshiro256++ state. Identical (seed, kind, id) triples
/// give identical sequences on every platform.
class RngStream {
public:
    RngStream() : RngStream(0, StreamKind::engine_misc, 0) {}
    RngStream(std::uint64_t seed, StreamKind kind, std::uint64_t entity_id);

    std::uint64_t next_u64();

    /// Uniform double in [0,1) with 53-bit resolution.
    double uniform01();

    /// Uniform integer in [lo, hi] inclusive, rejection-sampled (unbiased).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Normal via Marsaglia polar method; the second variate is discarded so
    /// consumption per call is deterministic in count.
    double normal(double mean, double stddev);

    /// Normal conditioned on [lo, hi] by rejection. Throws std::runtime_error
    /// after 1e6 rejections: that means the window has essentially no mass
    /// and the configuration is wrong.
    double truncated_normal(double mean, double stddev, double lo, double hi);

    /// Poisson by Knuth's product method; large means are split into chunks
    /// of at most 500 plus a remainder and the chunk draws summed.
    std::int64_t poisson(double mean);

private:
    std::uint64_t s_[4];
};

} // namespace ecsim
