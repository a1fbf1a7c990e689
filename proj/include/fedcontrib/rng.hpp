#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "fedcontrib/errors.hpp"

namespace fedcontrib {

// SplitMix64 finalizer. Used both as a hash mixer and to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a root seed and two stream
// coordinates (typically instance index and feature index). The chaining is
// order-sensitive, so (a, b) and (b, a) give unrelated streams. Batch runs
// that seed each work item this way are independent of execution order.
inline std::uint64_t derive_stream(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix64(root);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return h;
}

// Deterministic RNG wrapper. All draws go through portable integer paths on
// top of mt19937_64 (whose output sequence is pinned by the standard), so a
// fixed seed reproduces the same stream on any platform or compiler.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased draw in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw NumericError("Rng::below requires n > 0");
        const std::uint64_t threshold = (~std::uint64_t{0} - n + 1) % n;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Uniform random permutation of {0, ..., n-1}.
    std::vector<int> permutation(int n) {
        std::vector<int> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 0);
        shuffle(p);
        return p;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace fedcontrib
