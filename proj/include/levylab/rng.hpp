#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace levylab {

// Finalizer from splitmix64: bijective on 64-bit words, full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// Key for a named substream.  Streams for distinct (master, tag, id, id2)
// are independent for Monte Carlo purposes; replica-level parallelism hands
// each worker its own key so results cannot depend on scheduling.
constexpr std::uint64_t derive_key(std::uint64_t master, std::string_view tag,
                                   std::uint64_t id = 0, std::uint64_t id2 = 0) noexcept {
    std::uint64_t h = mix64(master ^ 0x9e3779b97f4a7c15ull);
    h = mix64(h ^ fnv1a(tag));
    h = mix64(h ^ id);
    h = mix64(h ^ id2);
    return h;
}

// Counter-based generator: output i is mix64(key + i*phi), i.e. splitmix64
// running on a per-stream key.  Copyable value type, no shared state.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}
    Rng(std::uint64_t master, std::string_view tag, std::uint64_t id = 0, std::uint64_t id2 = 0)
        : key_(derive_key(master, tag, id, id2)) {}

    std::uint64_t next_u64() {
        return mix64(key_ + 0x9e3779b97f4a7c15ull * ++ctr_);
    }

    // Strictly inside (0,1): dyadic midpoints, so log() and tan() stay finite.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double exponential() { return -std::log(uniform01()); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // Marsaglia polar; rejection keeps the map exact.
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace levylab
