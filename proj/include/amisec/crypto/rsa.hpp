#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amisec/crypto/biguint.hpp"
#include "amisec/core/rng.hpp"

namespace amisec {

// Desk-scale textbook modular-exponentiation cipher. Deliberately NOT
// production secure: no padding, no blinding, tiny moduli. It exists so the
// key-distribution protocol is executable and testable end to end.

struct CryptoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GenerationFailure : CryptoError {
    using CryptoError::CryptoError;
};
struct CorruptCiphertext : CryptoError {
    using CryptoError::CryptoError;
};

struct PublicKey {
    BigUint n;
    BigUint e;
    uint32_t bits = 0;
};

struct SecretKey {
    BigUint n;
    BigUint d;
    uint32_t bits = 0;
};

struct KeyPair {
    PublicKey pub;
    SecretKey sec;
    uint32_t bits = 0;
};

struct CipherBlob {
    std::vector<BigUint> chunks;
    uint32_t plain_len = 0;

    bool operator==(const CipherBlob& o) const {
        if (plain_len != o.plain_len || chunks.size() != o.chunks.size()) return false;
        for (size_t i = 0; i < chunks.size(); ++i)
            if (chunks[i] != o.chunks[i]) return false;
        return true;
    }
};

namespace detail {

inline const std::vector<uint32_t>& small_primes() {
    static const std::vector<uint32_t> primes = [] {
        std::vector<uint32_t> p;
        std::vector<bool> sieve(2000, true);
        for (uint32_t i = 2; i < sieve.size(); ++i) {
            if (!sieve[i]) continue;
            p.push_back(i);
            for (uint32_t j = 2 * i; j < sieve.size(); j += i) sieve[j] = false;
        }
        return p;
    }();
    return primes;
}

// Miller-Rabin with the first 40 primes as fixed witnesses; deterministic
// and comfortably strong at these sizes.
inline bool is_probable_prime(const BigUint& n) {
    if (n < BigUint(2)) return false;
    for (uint32_t p : small_primes()) {
        BigUint bp(p);
        if (n == bp) return true;
        if (n.mod(bp).is_zero()) return false;
    }
    // n - 1 = d * 2^r
    BigUint n1 = n.sub(BigUint(1));
    BigUint d = n1;
    size_t r = 0;
    while (!d.is_odd()) {
        d = d.shr(1);
        ++r;
    }
    int rounds = 0;
    for (uint32_t a : small_primes()) {
        if (rounds++ >= 40) break;
        BigUint x = BigUint::modexp(BigUint(a), d, n);
        if (x == BigUint(1) || x == n1) continue;
        bool witness = true;
        for (size_t i = 1; i < r; ++i) {
            x = x.mulmod(x, n);
            if (x == n1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

inline BigUint random_prime(RngStream& rng, size_t bits, size_t iteration_cap) {
    for (size_t iter = 0; iter < iteration_cap; ++iter) {
        BigUint c = BigUint::random_bits(rng, bits, /*top_bit_set=*/true);
        if (!c.is_odd()) c = c.add(BigUint(1));
        if (is_probable_prime(c)) return c;
    }
    throw GenerationFailure("random_prime: iteration cap exceeded");
}

}  // namespace detail

// Chunk of plaintext carried per modular exponentiation: one byte of
// headroom keeps every chunk strictly below the modulus.
inline size_t plain_chunk_bytes(uint32_t bits) { return (bits - 8) / 8; }
inline size_t cipher_chunk_bytes(uint32_t bits) { return (bits + 7) / 8; }

inline KeyPair keygen(uint32_t bits, RngStream& rng) {
    if (bits < 64 || bits % 2 != 0)
        throw std::invalid_argument("keygen: bits must be even and >= 64");
    const size_t half = bits / 2;
    const size_t cap = 10ull * bits;
    for (int attempt = 0; attempt < 16; ++attempt) {
        BigUint p = detail::random_prime(rng, half, cap);
        BigUint q = detail::random_prime(rng, half, cap);
        if (p == q) continue;
        BigUint n = p.mul(q);
        BigUint lambda = BigUint::lcm(p.sub(BigUint(1)), q.sub(BigUint(1)));
        for (uint64_t e_cand : {65537ull, 257ull, 17ull, 5ull, 3ull}) {
            BigUint e(e_cand);
            if (e >= lambda) continue;
            if (BigUint::gcd(e, lambda) != BigUint(1)) continue;
            BigUint d = BigUint::modinv(e, lambda);
            return KeyPair{PublicKey{n, e, bits}, SecretKey{n, d, bits}, bits};
        }
    }
    throw GenerationFailure("keygen: no usable exponent found");
}

inline CipherBlob encrypt(const PublicKey& pk, std::span<const uint8_t> m) {
    if (m.empty()) throw std::invalid_argument("encrypt: empty message");
    const size_t cw = plain_chunk_bytes(pk.bits);
    CipherBlob out;
    out.plain_len = static_cast<uint32_t>(m.size());
    for (size_t off = 0; off < m.size(); off += cw) {
        const size_t len = std::min(cw, m.size() - off);
        std::vector<uint8_t> chunk(m.begin() + off, m.begin() + off + len);
        chunk.resize(cw, 0);  // zero-pad the tail chunk; plain_len restores it
        BigUint v = BigUint::from_bytes_be(chunk);
        out.chunks.push_back(BigUint::modexp(v, pk.e, pk.n));
    }
    return out;
}

inline std::vector<uint8_t> decrypt(const SecretKey& sk, const CipherBlob& c) {
    const size_t cw = plain_chunk_bytes(sk.bits);
    std::vector<uint8_t> out;
    out.reserve(c.chunks.size() * cw);
    for (const BigUint& chunk : c.chunks) {
        if (chunk >= sk.n) throw CorruptCiphertext("decrypt: chunk >= modulus");
        BigUint m = BigUint::modexp(chunk, sk.d, sk.n);
        std::vector<uint8_t> bytes = m.mod(BigUint::pow2(8 * cw)).to_bytes_be(cw);
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    if (c.plain_len > out.size())
        throw CorruptCiphertext("decrypt: plain_len exceeds decrypted size");
    out.resize(c.plain_len);
    return out;
}

// --- wire / file formats ----------------------------------------------------

inline std::string serialize_public_key(const PublicKey& k) {
    return "n=" + k.n.to_hex() + " e=" + k.e.to_hex();
}
inline std::string serialize_secret_key(const SecretKey& k) {
    return "n=" + k.n.to_hex() + " d=" + k.d.to_hex();
}

namespace detail {
inline BigUint parse_field(std::string_view line, std::string_view tag) {
    size_t pos = line.find(tag);
    if (pos == std::string_view::npos)
        throw CryptoError("key parse: missing field " + std::string(tag));
    size_t start = pos + tag.size();
    size_t end = line.find(' ', start);
    if (end == std::string_view::npos) end = line.size();
    return BigUint::from_hex(line.substr(start, end - start));
}
}  // namespace detail

inline PublicKey parse_public_key(std::string_view line) {
    PublicKey k;
    k.n = detail::parse_field(line, "n=");
    k.e = detail::parse_field(line, "e=");
    k.bits = static_cast<uint32_t>((k.n.bit_length() + 7) / 8 * 8);
    return k;
}

inline SecretKey parse_secret_key(std::string_view line) {
    SecretKey k;
    k.n = detail::parse_field(line, "n=");
    k.d = detail::parse_field(line, "d=");
    k.bits = static_cast<uint32_t>((k.n.bit_length() + 7) / 8 * 8);
    return k;
}

// Self-delimiting byte form of a CipherBlob:
//   u32 plain_len | u16 chunk_width | u16 chunk_count | chunks (fixed width, BE)
inline std::vector<uint8_t> cipher_to_bytes(const CipherBlob& c, uint32_t key_bits) {
    const size_t cw = cipher_chunk_bytes(key_bits);
    std::vector<uint8_t> out;
    out.reserve(8 + cw * c.chunks.size());
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(c.plain_len >> (8 * i)));
    out.push_back(static_cast<uint8_t>(cw >> 8));
    out.push_back(static_cast<uint8_t>(cw));
    out.push_back(static_cast<uint8_t>(c.chunks.size() >> 8));
    out.push_back(static_cast<uint8_t>(c.chunks.size()));
    for (const BigUint& chunk : c.chunks) {
        std::vector<uint8_t> b = chunk.to_bytes_be(cw);
        if (b.size() != cw) throw CryptoError("cipher_to_bytes: chunk exceeds width");
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

inline CipherBlob cipher_from_bytes(std::span<const uint8_t> b) {
    if (b.size() < 8) throw CorruptCiphertext("cipher_from_bytes: short buffer");
    CipherBlob c;
    c.plain_len = (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | b[3];
    const size_t cw = (size_t(b[4]) << 8) | b[5];
    const size_t count = (size_t(b[6]) << 8) | b[7];
    if (cw == 0 || b.size() < 8 + cw * count)
        throw CorruptCiphertext("cipher_from_bytes: truncated chunks");
    for (size_t i = 0; i < count; ++i) {
        c.chunks.push_back(BigUint::from_bytes_be(b.subspan(8 + i * cw, cw)));
    }
    return c;
}

}  // namespace amisec
