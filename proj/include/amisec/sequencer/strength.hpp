#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

#include "amisec/crypto/biguint.hpp"

namespace amisec {

// H = -sum p log2 p. The distribution must be nonnegative and sum to 1.
inline double shannon_entropy(std::span<const double> dist) {
    double sum = 0.0;
    for (double p : dist) {
        if (p < 0.0 || !std::isfinite(p))
            throw std::domain_error("shannon_entropy: invalid probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::domain_error("shannon_entropy: probabilities must sum to 1");
    double h = 0.0;
    for (double p : dist) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

// Entropy of a uniform distribution over 2^log2_outcomes values, computed
// symbolically; usable far beyond what an explicit vector could hold.
inline double uniform_entropy_bits(double log2_outcomes) {
    if (log2_outcomes < 0) throw std::domain_error("uniform_entropy_bits: negative support");
    return log2_outcomes;
}

// log2(block_count!)
inline double permutation_entropy_bits(uint32_t block_count) {
    double h = 0.0;
    for (uint32_t k = 2; k <= block_count; ++k) h += std::log2(static_cast<double>(k));
    return h;
}

struct StrengthReport {
    uint32_t packet_bits = 0;
    uint32_t block_count = 0;
    uint32_t key_bits = 0;
    uint32_t term1_log2 = 0;       // packet exponent
    uint32_t term2_log2 = 0;       // key_bits / 2
    std::string decimal;           // exact 2^term1 + 2^term2
    double permutation_entropy = 0.0;

    std::string log2_terms() const {
        return "2^" + std::to_string(term1_log2) + " + 2^" + std::to_string(term2_log2);
    }

    static std::string csv_header() {
        return "packet_bits,block_count,key_bits,paper_strength_decimal,permutation_entropy_bits";
    }

    std::string csv_row() const {
        std::ostringstream os;
        os.precision(17);
        os << packet_bits << ',' << block_count << ',' << key_bits << ',' << decimal << ','
           << permutation_entropy;
        return os.str();
    }
};

// Iterations an attacker needs at worst: 2^packet_bits for the randomized
// packet plus 2^(key_bits/2) for the key. The permutation entropy of the
// block ordering, log2(block_count!), is reported alongside as an
// independent sanity metric.
inline StrengthReport strength_report(uint32_t packet_bits, uint32_t block_count,
                                      uint32_t key_bits) {
    if (block_count == 0 || packet_bits % block_count != 0)
        throw std::domain_error("strength_report: packet_bits must divide by block_count");
    if (key_bits % 2 != 0)
        throw std::domain_error("strength_report: key_bits must be even");
    StrengthReport r;
    r.packet_bits = packet_bits;
    r.block_count = block_count;
    r.key_bits = key_bits;
    r.term1_log2 = packet_bits;
    r.term2_log2 = key_bits / 2;
    r.decimal = BigUint::pow2(packet_bits).add(BigUint::pow2(key_bits / 2)).to_decimal();
    r.permutation_entropy = permutation_entropy_bits(block_count);
    return r;
}

}  // namespace amisec
