#pragma once

#include <cstdint>
#include <random>

namespace hetcop {

namespace detail {
/// SplitMix64 step, used to decorrelate (seed, stream) pairs before feeding
/// the main generator.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Seeded generator. Distinct (seed, stream) pairs give independent streams,
/// which is how parallel Monte Carlo blocks and per-day forecast draws are
/// decorrelated.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t s = seed ^ (0xa02bdbf7bb3c0a7ULL * (stream + 1));
        std::uint64_t a = detail::splitmix64(s);
        std::uint64_t b = detail::splitmix64(s);
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        gen_.seed(seq);
    }

    /// Uniform on the open interval (0,1).
    double uniform() {
        // 53-bit mantissa draw, then nudge away from 0
        double u = (gen_() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double normal() { return normal_(gen_); }

    std::uint64_t raw() { return gen_(); }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace hetcop
