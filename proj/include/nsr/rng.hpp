#pragma once

#include <cstdint>
#include <random>

namespace nsr {

/// Seeded generator with platform-independent derived distributions.
///
/// std::uniform_*_distribution and std::normal_distribution are
/// implementation-defined, so samples are derived here from the raw
/// mt19937_64 stream:
///   uniform01   = (bits >> 11) * 2^-53
///   uniform_int = rejection sampling on the raw 64-bit stream
///   normal      = Marsaglia polar method on uniform(-1,1) pairs
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n);
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// splitmix64 finalizer; derives independent stream seeds from one base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace nsr
