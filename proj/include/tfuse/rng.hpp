#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tfuse {

// Seeded generator with named streams. Every consumer derives its own
// engine from (seed, stream name) so adding draws in one module never
// shifts the sequence seen by another. The engine is std::mt19937_64,
// whose output sequence is fixed by the standard; the real-valued draws
// below are computed here instead of through <random> distributions,
// whose algorithms are implementation-defined.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view stream);

    std::uint64_t next_u64() { return engine_(); }
    // Uniform on [0, 1) with 53 bits of mantissa.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Box-Muller, one value per call.
    double normal();
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double p) { return uniform() < p; }

    template <typename It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
// FNV-1a 64-bit, used for stream names and dataset checksums.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace tfuse
