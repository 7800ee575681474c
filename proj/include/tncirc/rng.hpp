#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace tncirc {

// Seeded RNG used everywhere determinism matters. Distributions are
// hand-rolled on top of mt19937_64 so that a given seed produces the same
// stream on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    // +1 or -1 with equal probability.
    double rademacher() { return (engine_() & 1ull) ? 1.0 : -1.0; }

    std::uint64_t raw() { return engine_(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[uniform_int(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tncirc
