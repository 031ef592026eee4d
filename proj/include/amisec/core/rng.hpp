#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace amisec {

// 64-bit FNV-1a. Stable across platforms; used to derive sub-streams and to
// seed the order sampler from a random sequence.
inline uint64_t fnv1a64(std::span<const uint8_t> bytes,
                        uint64_t h = 0xcbf29ce484222325ull) {
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64_u64(uint64_t v, uint64_t h = 0xcbf29ce484222325ull) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// One RNG stream per purpose. Mixing (seed, stream_id) through splitmix64
// keeps draw sequences independent: changing how many numbers one consumer
// pulls never perturbs another consumer's sequence.
enum class StreamId : uint64_t {
    Crypto     = 0x01,
    Sequencer  = 0x02,
    Noise      = 0x03,
    Pso        = 0x04,
    DataGen    = 0x05,
    SimControl = 0x06,
    SimLoss    = 0x07,
    Adversary  = 0x08,
    Test       = 0x63,
};

// Deterministic xoshiro256** stream. All distributions are hand-rolled so
// that identical (seed, stream_id) yields identical draws on every platform;
// std::<distribution> types are implementation-defined and never used.
class RngStream {
public:
    RngStream(uint64_t seed, uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {
        uint64_t sm = seed ^ (0x9e3779b97f4a7c15ull * (stream_id + 1));
        for (auto& s : state_) s = splitmix64(sm);
        if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0)
            state_[0] = 1;
    }
    RngStream(uint64_t seed, StreamId id)
        : RngStream(seed, static_cast<uint64_t>(id)) {}

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_id_; }

    // Child stream for trial k: deterministic, independent of draw position.
    RngStream derive(uint64_t k) const {
        return RngStream(seed_, fnv1a64_u64(k, fnv1a64_u64(stream_id_)));
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, bound) by rejection.
    uint64_t uniform_int(uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_int: bound must be > 0");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // Standard normal via Box-Muller with a cached spare.
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double gauss(double mean, double sd) { return mean + sd * gauss(); }

    void fill_bytes(std::span<uint8_t> out) {
        size_t i = 0;
        while (i < out.size()) {
            uint64_t v = next_u64();
            for (int b = 0; b < 8 && i < out.size(); ++b, ++i)
                out[i] = static_cast<uint8_t>(v >> (8 * b));
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t seed_;
    uint64_t stream_id_;
    std::array<uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace amisec
