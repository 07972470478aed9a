#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace sdiff {

// mt19937_64 engine (sequence fixed by the standard) with hand-rolled
// distributions, so a seed gives the same numbers on every toolchain.
// Streams: derive(master, k) = splitmix64(master ^ splitmix64(k + golden)).
// Normals: Marsaglia polar method, second value cached.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) {
        return mix(master ^ mix(stream + 0x632BE59BD9B4E019ULL));
    }

    std::uint64_t next() { return eng_(); }

    // [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2 * uniform() - 1;
            v = 2 * uniform() - 1;
            q = u * u + v * v;
        } while (q >= 1 || q == 0);
        const double f = std::sqrt(-2 * std::log(q) / q);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    // uniform on {0, ..., n-1}, rejection to avoid modulo bias
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do r = next();
        while (r >= limit);
        return r % n;
    }

    // k distinct values from {0..n-1}, partial Fisher-Yates, in draw order
    template <class I = long>
    std::vector<I> sample(I n, I k) {
        std::vector<I> pool(static_cast<std::size_t>(n));
        std::iota(pool.begin(), pool.end(), I(0));
        for (I i = 0; i < k; ++i) {
            const I j = i + static_cast<I>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(static_cast<std::size_t>(k));
        return pool;
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0;
};

}  // namespace sdiff
