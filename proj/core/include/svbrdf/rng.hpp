#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace svbrdf {

// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// distributions are hand-rolled because std::uniform_real_distribution and
// friends are implementation-defined and would break cross-toolchain
// reproducibility of seeded runs.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_index(uint64_t n) {
        // modulo bias is negligible for n << 2^64 and keeps the stream simple
        return engine_() % n;
    }

    // standard normal via Box-Muller (one value per draw, spare discarded
    // so consumption stays position-independent)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::mt19937_64 engine_;
};

// FNV-1a, used for seed derivation and checkpoint/content hashes.
uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t fnv1a64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull);

// Stable child seed from a parent seed and a label, e.g. per-crop lighting.
uint64_t derive_seed(uint64_t parent, std::string_view label, uint64_t index = 0);

} // namespace svbrdf
