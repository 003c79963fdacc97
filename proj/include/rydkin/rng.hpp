#pragma once

// Self-contained pseudo-random machinery. Trajectory results must be
// bit-reproducible from (seed, stream index) alone, independent of platform,
// thread count and standard-library version, so the generator and all
// samplers are implemented here instead of using <random> distributions
// (whose algorithms are implementation-defined).

#include <cmath>
#include <cstdint>
#include <vector>

namespace rydkin {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna), seeded through splitmix64.
class Rng {
  public:
    Rng() : Rng(0, 0) {}
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed ^ (0xA3C59AC2ED9458F1ull * (stream + 1));
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
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

    // uniform in [0,1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [0,n)
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift bounded draw; modulo bias < 2^-64, irrelevant here
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    // exponential waiting time with rate lambda > 0
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    // standard normal via Box-Muller (one deviate per call, no cached spare)
    double normal() {
        double u1 = 1.0 - uniform(); // (0,1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Poisson by inversion-of-products; chunked so exp() never underflows
    std::uint64_t poisson(double mean) {
        std::uint64_t n = 0;
        while (mean > 0) {
            double chunk = mean > 60.0 ? 60.0 : mean;
            mean -= chunk;
            double limit = std::exp(-chunk);
            double prod = uniform();
            while (prod > limit) {
                ++n;
                prod *= uniform();
            }
        }
        return n;
    }

    std::uint64_t binomial(std::uint64_t n, double p) {
        std::uint64_t k = 0;
        for (std::uint64_t i = 0; i < n; ++i)
            if (uniform() < p) ++k;
        return k;
    }

    // k distinct indices drawn uniformly from `pool` (partial Fisher-Yates)
    std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t k) {
        if (k > pool.size()) k = pool.size();
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace rydkin
