#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amisec/core/rng.hpp"

namespace amisec {

struct SequencerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-session permutation of {1..n} governing transmission order.
struct RandomSequence {
    std::vector<uint16_t> values;

    RandomSequence() = default;
    explicit RandomSequence(std::vector<uint16_t> v) : values(std::move(v)) { validate(); }

    uint16_t n() const { return static_cast<uint16_t>(values.size()); }

    bool operator==(const RandomSequence& o) const { return values == o.values; }

    void validate() const {
        if (values.size() < 2)
            throw SequencerError("RandomSequence: need n >= 2");
        std::vector<bool> seen(values.size() + 1, false);
        for (uint16_t v : values) {
            if (v < 1 || v > values.size() || seen[v])
                throw SequencerError("RandomSequence: not a permutation of 1..n");
            seen[v] = true;
        }
    }

    std::vector<uint8_t> to_bytes() const {
        std::vector<uint8_t> b;
        b.reserve(2 + values.size() * 2);
        b.push_back(static_cast<uint8_t>(values.size() >> 8));
        b.push_back(static_cast<uint8_t>(values.size()));
        for (uint16_t v : values) {
            b.push_back(static_cast<uint8_t>(v >> 8));
            b.push_back(static_cast<uint8_t>(v));
        }
        return b;
    }

    static RandomSequence from_bytes(std::span<const uint8_t> b) {
        if (b.size() < 2) throw SequencerError("RandomSequence: short buffer");
        size_t n = (size_t(b[0]) << 8) | b[1];
        if (b.size() < 2 + 2 * n) throw SequencerError("RandomSequence: truncated");
        std::vector<uint16_t> v(n);
        for (size_t i = 0; i < n; ++i)
            v[i] = static_cast<uint16_t>((uint16_t(b[2 + 2 * i]) << 8) | b[3 + 2 * i]);
        return RandomSequence(std::move(v));
    }
};

// Fisher-Yates permutation of 1..n; redrawn whenever it equals the previous
// session's sequence.
inline RandomSequence gen_sequence(RngStream& rng, uint16_t n,
                                   const RandomSequence* prev = nullptr) {
    if (n < 2) throw SequencerError("gen_sequence: need n >= 2");
    std::vector<uint16_t> v(n);
    while (true) {
        std::iota(v.begin(), v.end(), uint16_t{1});
        for (size_t i = n; i > 1; --i) {
            size_t j = rng.uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
        if (!prev || v != prev->values) break;
    }
    return RandomSequence(v);
}

// p_i proportional to 1/s_i, normalized to sum 1.
inline std::vector<double> block_weights(const RandomSequence& s) {
    std::vector<double> p(s.values.size());
    double total = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        p[i] = 1.0 / static_cast<double>(s.values[i]);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

// Transmission position k carries source block order[k] (0-based).
struct TransmissionOrder {
    std::vector<uint16_t> order;

    uint16_t n() const { return static_cast<uint16_t>(order.size()); }
};

// Weighted sampling without replacement. Exposed separately so the sampling
// machinery can be tested with an arbitrary stream.
inline std::vector<uint16_t> weighted_order(std::span<const double> weights, RngStream& rng) {
    std::vector<uint16_t> remaining(weights.size());
    std::iota(remaining.begin(), remaining.end(), uint16_t{0});
    std::vector<double> w(weights.begin(), weights.end());
    std::vector<uint16_t> out;
    out.reserve(weights.size());
    while (!remaining.empty()) {
        double total = 0.0;
        for (size_t i = 0; i < remaining.size(); ++i) total += w[i];
        double r = rng.uniform() * total;
        size_t pick = remaining.size() - 1;
        double acc = 0.0;
        for (size_t i = 0; i < remaining.size(); ++i) {
            acc += w[i];
            if (r < acc) {
                pick = i;
                break;
            }
        }
        out.push_back(remaining[pick]);
        remaining.erase(remaining.begin() + pick);
        w.erase(w.begin() + pick);
    }
    return out;
}

// The realized order is a pure function of S: the sampler is driven by a
// stream seeded from a hash of S's values, so sender and control center
// reconstruct the identical permutation from S alone.
inline TransmissionOrder derive_order(const RandomSequence& s) {
    s.validate();
    std::vector<uint8_t> bytes = s.to_bytes();
    uint64_t h = fnv1a64(bytes);
    RngStream rng(h, StreamId::Sequencer);
    std::vector<double> p = block_weights(s);
    return TransmissionOrder{weighted_order(p, rng)};
}

struct BlockSet {
    std::vector<std::vector<uint8_t>> blocks;
    uint32_t block_bits = 0;
    uint16_t pad_bytes = 0;  // zero bytes appended before splitting

    bool operator==(const BlockSet&) const = default;
};

// Split a ciphertext byte stream into n equal blocks, zero-padding the tail
// and recording the pad length.
inline BlockSet segment(std::span<const uint8_t> c, uint16_t n) {
    if (n < 2) throw SequencerError("segment: need n >= 2");
    if (static_cast<size_t>(n) > c.size() * 8)
        throw SequencerError("segment: more blocks than input bits");
    const size_t pad = (n - c.size() % n) % n;
    if (pad > 0xffff) throw SequencerError("segment: pad too large");
    std::vector<uint8_t> padded(c.begin(), c.end());
    padded.resize(c.size() + pad, 0);
    const size_t bl = padded.size() / n;
    BlockSet out;
    out.block_bits = static_cast<uint32_t>(bl * 8);
    out.pad_bytes = static_cast<uint16_t>(pad);
    out.blocks.reserve(n);
    for (size_t i = 0; i < n; ++i)
        out.blocks.emplace_back(padded.begin() + i * bl, padded.begin() + (i + 1) * bl);
    return out;
}

inline std::vector<uint8_t> unsegment(const BlockSet& b) {
    std::vector<uint8_t> out;
    for (const auto& blk : b.blocks) out.insert(out.end(), blk.begin(), blk.end());
    if (b.pad_bytes > out.size()) throw SequencerError("unsegment: pad exceeds data");
    out.resize(out.size() - b.pad_bytes);
    return out;
}

// h_k = m_{order[k]}.
inline std::vector<std::vector<uint8_t>> apply_order(const BlockSet& b,
                                                     const TransmissionOrder& o) {
    if (b.blocks.size() != o.order.size())
        throw SequencerError("apply_order: length mismatch");
    std::vector<std::vector<uint8_t>> h(b.blocks.size());
    for (size_t k = 0; k < o.order.size(); ++k) h[k] = b.blocks[o.order[k]];
    return h;
}

inline BlockSet invert_order(const std::vector<std::vector<uint8_t>>& h,
                             const TransmissionOrder& o, uint16_t pad_bytes = 0) {
    if (h.size() != o.order.size())
        throw SequencerError("invert_order: length mismatch");
    BlockSet b;
    b.blocks.resize(h.size());
    for (size_t k = 0; k < o.order.size(); ++k) b.blocks[o.order[k]] = h[k];
    b.block_bits = h.empty() ? 0 : static_cast<uint32_t>(h[0].size() * 8);
    b.pad_bytes = pad_bytes;
    return b;
}

}  // namespace amisec
