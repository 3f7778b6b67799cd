#pragma once

#include <cstdint>
#include <string_view>

namespace gaal {

/// Splittable 64-bit generator (xoshiro256** state seeded through splitmix64).
///
/// Every stochastic routine takes an `Rng&` or a seed explicitly; nothing draws
/// from global state. `split(key)` derives an independent child stream without
/// advancing the parent, so streams can be handed out by name.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer on [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Standard normal via Box-Muller; the spare deviate is cached.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    Rng split(std::uint64_t key) const;
    Rng split(std::string_view key) const;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash_key(std::string_view key);

}  // namespace gaal
