#pragma once

// Deterministic random source. xoshiro256++ with a splitmix64 seeder; the
// uniform mappings are written out explicitly so streams are bit-identical
// across platforms and standard libraries.

#include <cstdint>

namespace conical {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            // splitmix64 step
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is < 2^-64 per draw, irrelevant here, and the
        // mapping is fully deterministic.
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Derives an independent deterministic substream.
    Rng fork(std::uint64_t tag) { return Rng(next() ^ (tag * 0x9e3779b97f4a7c15ULL)); }

  private:
    std::uint64_t state_[4] = {};
};

}  // namespace conical
