#include "svbrdf/rng.hpp"

#include <cstring>

namespace svbrdf {

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64(std::string_view s, uint64_t seed) {
    return fnv1a64(s.data(), s.size(), seed);
}

uint64_t derive_seed(uint64_t parent, std::string_view label, uint64_t index) {
    uint64_t h = fnv1a64(&parent, sizeof(parent));
    h = fnv1a64(label, h);
    h = fnv1a64(&index, sizeof(index), h);
    return h;
}

} // namespace svbrdf
