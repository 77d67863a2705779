// rng.hpp
// Deterministic random streams. splitmix64 keeps draws portable across
// standard library implementations; substreams are derived from
// (seed, id) so rounds can be evaluated independently.

#pragma once

#include <cstdint>

namespace pqtqkd {

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    static RandomStream substream(std::uint64_t seed, std::uint64_t id) {
        RandomStream base(seed);
        const std::uint64_t a = base.next_u64();
        const std::uint64_t b = base.next_u64();
        return RandomStream(a ^ (id * 0x9e3779b97f4a7c15ULL) ^ (b + id));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    int next_bit() { return static_cast<int>(next_u64() >> 63); }

    // Uniform in [0, n) without modulo bias.
    std::size_t next_index(std::size_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return static_cast<std::size_t>(r % n);
    }

private:
    std::uint64_t state_;
};

}  // namespace pqtqkd
