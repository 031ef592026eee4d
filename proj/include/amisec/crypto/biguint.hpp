#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amisec/core/rng.hpp"

namespace amisec {

// Arbitrary-precision unsigned integer with 64-bit limbs (little-endian).
// Sized for desk-scale key material (64..512 bits); no attempt at
// constant-time behaviour.
class BigUint {
public:
    struct DivMod;

    BigUint() = default;
    BigUint(uint64_t v) {
        if (v) limbs_.push_back(v);
    }

    static BigUint from_bytes_be(std::span<const uint8_t> bytes) {
        BigUint r;
        for (uint8_t b : bytes) {
            r = r.shl(8);
            if (b) r = r.add(BigUint(b));
        }
        return r;
    }

    static BigUint from_hex(std::string_view s) {
        BigUint r;
        for (char c : s) {
            int d;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
            else throw std::invalid_argument("BigUint::from_hex: bad digit");
            r = r.shl(4).add(BigUint(static_cast<uint64_t>(d)));
        }
        return r;
    }

    static BigUint pow2(size_t n) {
        BigUint r;
        r.limbs_.assign(n / 64 + 1, 0);
        r.limbs_[n / 64] = 1ull << (n % 64);
        return r;
    }

    // Uniform integer with exactly `bits` bits (top bit set) when top_bit_set,
    // otherwise uniform in [0, 2^bits).
    static BigUint random_bits(RngStream& rng, size_t bits, bool top_bit_set = false) {
        if (bits == 0) return BigUint();
        BigUint r;
        r.limbs_.assign((bits + 63) / 64, 0);
        for (auto& l : r.limbs_) l = rng.next_u64();
        size_t excess = r.limbs_.size() * 64 - bits;
        r.limbs_.back() >>= excess;
        if (top_bit_set) r.limbs_.back() |= 1ull << ((bits - 1) % 64);
        r.trim();
        return r;
    }

    bool is_zero() const { return limbs_.empty(); }
    bool is_odd() const { return !limbs_.empty() && (limbs_[0] & 1); }

    size_t bit_length() const {
        if (limbs_.empty()) return 0;
        size_t top = 63;
        uint64_t h = limbs_.back();
        while (!(h & (1ull << top))) --top;
        return (limbs_.size() - 1) * 64 + top + 1;
    }

    bool bit(size_t i) const {
        size_t limb = i / 64;
        if (limb >= limbs_.size()) return false;
        return (limbs_[limb] >> (i % 64)) & 1;
    }

    int compare(const BigUint& o) const {
        if (limbs_.size() != o.limbs_.size())
            return limbs_.size() < o.limbs_.size() ? -1 : 1;
        for (size_t i = limbs_.size(); i-- > 0;) {
            if (limbs_[i] != o.limbs_[i]) return limbs_[i] < o.limbs_[i] ? -1 : 1;
        }
        return 0;
    }

    bool operator==(const BigUint& o) const { return compare(o) == 0; }
    bool operator!=(const BigUint& o) const { return compare(o) != 0; }
    bool operator<(const BigUint& o) const { return compare(o) < 0; }
    bool operator<=(const BigUint& o) const { return compare(o) <= 0; }
    bool operator>(const BigUint& o) const { return compare(o) > 0; }
    bool operator>=(const BigUint& o) const { return compare(o) >= 0; }

    BigUint add(const BigUint& o) const {
        BigUint r;
        const size_t n = std::max(limbs_.size(), o.limbs_.size());
        r.limbs_.reserve(n + 1);
        unsigned __int128 carry = 0;
        for (size_t i = 0; i < n; ++i) {
            unsigned __int128 s = carry;
            if (i < limbs_.size()) s += limbs_[i];
            if (i < o.limbs_.size()) s += o.limbs_[i];
            r.limbs_.push_back(static_cast<uint64_t>(s));
            carry = s >> 64;
        }
        if (carry) r.limbs_.push_back(static_cast<uint64_t>(carry));
        return r;
    }

    // Requires *this >= o.
    BigUint sub(const BigUint& o) const {
        if (*this < o) throw std::underflow_error("BigUint::sub: negative result");
        BigUint r;
        r.limbs_.assign(limbs_.size(), 0);
        unsigned __int128 borrow = 0;
        for (size_t i = 0; i < limbs_.size(); ++i) {
            unsigned __int128 oi = (i < o.limbs_.size() ? o.limbs_[i] : 0) + borrow;
            unsigned __int128 a = limbs_[i];
            if (a >= oi) {
                r.limbs_[i] = static_cast<uint64_t>(a - oi);
                borrow = 0;
            } else {
                r.limbs_[i] =
                    static_cast<uint64_t>((static_cast<unsigned __int128>(1) << 64) + a - oi);
                borrow = 1;
            }
        }
        r.trim();
        return r;
    }

    BigUint mul(const BigUint& o) const {
        if (is_zero() || o.is_zero()) return BigUint();
        BigUint r;
        r.limbs_.assign(limbs_.size() + o.limbs_.size(), 0);
        for (size_t i = 0; i < limbs_.size(); ++i) {
            unsigned __int128 carry = 0;
            for (size_t j = 0; j < o.limbs_.size(); ++j) {
                unsigned __int128 cur = static_cast<unsigned __int128>(limbs_[i]) * o.limbs_[j] +
                                        r.limbs_[i + j] + carry;
                r.limbs_[i + j] = static_cast<uint64_t>(cur);
                carry = cur >> 64;
            }
            size_t k = i + o.limbs_.size();
            while (carry) {
                unsigned __int128 cur = r.limbs_[k] + carry;
                r.limbs_[k] = static_cast<uint64_t>(cur);
                carry = cur >> 64;
                ++k;
            }
        }
        r.trim();
        return r;
    }

    BigUint shl(size_t bits) const {
        if (is_zero() || bits == 0) return *this;
        const size_t limb_shift = bits / 64, bit_shift = bits % 64;
        BigUint r;
        r.limbs_.assign(limbs_.size() + limb_shift + 1, 0);
        for (size_t i = 0; i < limbs_.size(); ++i) {
            r.limbs_[i + limb_shift] |= limbs_[i] << bit_shift;
            if (bit_shift)
                r.limbs_[i + limb_shift + 1] |= limbs_[i] >> (64 - bit_shift);
        }
        r.trim();
        return r;
    }

    BigUint shr(size_t bits) const {
        const size_t limb_shift = bits / 64, bit_shift = bits % 64;
        if (limb_shift >= limbs_.size()) return BigUint();
        BigUint r;
        r.limbs_.assign(limbs_.size() - limb_shift, 0);
        for (size_t i = 0; i < r.limbs_.size(); ++i) {
            r.limbs_[i] = limbs_[i + limb_shift] >> bit_shift;
            if (bit_shift && i + limb_shift + 1 < limbs_.size())
                r.limbs_[i] |= limbs_[i + limb_shift + 1] << (64 - bit_shift);
        }
        r.trim();
        return r;
    }

    DivMod divmod(const BigUint& divisor) const;
    BigUint mod(const BigUint& m) const;
    BigUint mulmod(const BigUint& o, const BigUint& m) const;
    static BigUint modexp(const BigUint& base, const BigUint& exp, const BigUint& mod);
    static BigUint gcd(BigUint a, BigUint b);
    static BigUint lcm(const BigUint& a, const BigUint& b);
    static BigUint modinv(const BigUint& a, const BigUint& m);
    std::string to_decimal() const;

    std::vector<uint8_t> to_bytes_be(size_t min_len = 0) const {
        std::vector<uint8_t> out;
        for (size_t i = 0; i < limbs_.size(); ++i) {
            uint64_t l = limbs_[i];
            for (int b = 0; b < 8; ++b) out.push_back(static_cast<uint8_t>(l >> (8 * b)));
        }
        while (!out.empty() && out.back() == 0) out.pop_back();
        while (out.size() < min_len) out.push_back(0);
        std::reverse(out.begin(), out.end());
        return out;
    }

    std::string to_hex() const {
        if (is_zero()) return "0";
        static const char* digits = "0123456789abcdef";
        std::string s;
        for (size_t i = limbs_.size(); i-- > 0;) {
            for (int shift = 60; shift >= 0; shift -= 4)
                s.push_back(digits[(limbs_[i] >> shift) & 0xf]);
        }
        size_t nz = s.find_first_not_of('0');
        return s.substr(nz);
    }

    uint64_t low_u64() const { return limbs_.empty() ? 0 : limbs_[0]; }

private:
    void trim() {
        while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    }

    std::vector<uint64_t> limbs_;
};

struct BigUint::DivMod {
    BigUint quotient;
    BigUint remainder;
};

// Knuth algorithm D.
inline BigUint::DivMod BigUint::divmod(const BigUint& divisor) const {
    if (divisor.is_zero()) throw std::domain_error("BigUint::divmod: divide by zero");
    if (*this < divisor) return {BigUint(), *this};
    if (divisor.limbs_.size() == 1) {
        BigUint q;
        q.limbs_.assign(limbs_.size(), 0);
        unsigned __int128 rem = 0;
        for (size_t i = limbs_.size(); i-- > 0;) {
            unsigned __int128 cur = (rem << 64) | limbs_[i];
            q.limbs_[i] = static_cast<uint64_t>(cur / divisor.limbs_[0]);
            rem = cur % divisor.limbs_[0];
        }
        q.trim();
        return {q, BigUint(static_cast<uint64_t>(rem))};
    }

    // Normalize so the divisor's top limb has its high bit set.
    size_t shift = 0;
    uint64_t top = divisor.limbs_.back();
    while (!(top & (1ull << 63))) {
        top <<= 1;
        ++shift;
    }
    BigUint u = shl(shift);
    BigUint v = divisor.shl(shift);
    const size_t n = v.limbs_.size();
    const size_t m = u.limbs_.size() < n ? 0 : u.limbs_.size() - n;

    std::vector<uint64_t> un(u.limbs_);
    un.resize(m + n + 1, 0);
    const std::vector<uint64_t>& vn = v.limbs_;

    BigUint q;
    q.limbs_.assign(m + 1, 0);

    for (size_t j = m + 1; j-- > 0;) {
        unsigned __int128 num =
            (static_cast<unsigned __int128>(un[j + n]) << 64) | un[j + n - 1];
        unsigned __int128 qhat = num / vn[n - 1];
        unsigned __int128 rhat = num % vn[n - 1];
        while (qhat >> 64 || qhat * vn[n - 2] > ((rhat << 64) | un[j + n - 2])) {
            --qhat;
            rhat += vn[n - 1];
            if (rhat >> 64) break;
        }
        // Multiply-subtract qhat * v from un[j .. j+n].
        unsigned __int128 borrow = 0, carry = 0;
        for (size_t i = 0; i < n; ++i) {
            unsigned __int128 p = qhat * vn[i] + carry;
            carry = p >> 64;
            uint64_t plo = static_cast<uint64_t>(p);
            uint64_t ui = un[i + j];
            uint64_t diff = ui - plo - static_cast<uint64_t>(borrow);
            borrow = (static_cast<unsigned __int128>(plo) + borrow > ui) ? 1 : 0;
            un[i + j] = diff;
        }
        unsigned __int128 total =
            static_cast<unsigned __int128>(un[j + n]) - carry - borrow;
        un[j + n] = static_cast<uint64_t>(total);
        bool went_negative = (total >> 64) != 0;

        if (went_negative) {
            // qhat was one too large: add v back.
            --qhat;
            unsigned __int128 c2 = 0;
            for (size_t i = 0; i < n; ++i) {
                unsigned __int128 s = static_cast<unsigned __int128>(un[i + j]) + vn[i] + c2;
                un[i + j] = static_cast<uint64_t>(s);
                c2 = s >> 64;
            }
            un[j + n] = static_cast<uint64_t>(un[j + n] + c2);
        }
        q.limbs_[j] = static_cast<uint64_t>(qhat);
    }
    q.trim();

    BigUint r;
    r.limbs_.assign(un.begin(), un.begin() + n);
    r.trim();
    return {q, r.shr(shift)};
}

inline BigUint BigUint::mod(const BigUint& m) const { return divmod(m).remainder; }

inline BigUint BigUint::mulmod(const BigUint& o, const BigUint& m) const {
    return mul(o).mod(m);
}

inline BigUint BigUint::modexp(const BigUint& base, const BigUint& exp, const BigUint& mod) {
    if (mod.is_zero()) throw std::domain_error("BigUint::modexp: zero modulus");
    if (mod == BigUint(1)) return BigUint();
    BigUint result(1);
    BigUint b = base.mod(mod);
    const size_t nbits = exp.bit_length();
    for (size_t i = 0; i < nbits; ++i) {
        if (exp.bit(i)) result = result.mulmod(b, mod);
        b = b.mulmod(b, mod);
    }
    return result;
}

inline BigUint BigUint::gcd(BigUint a, BigUint b) {
    while (!b.is_zero()) {
        BigUint r = a.mod(b);
        a = b;
        b = r;
    }
    return a;
}

inline BigUint BigUint::lcm(const BigUint& a, const BigUint& b) {
    if (a.is_zero() || b.is_zero()) return BigUint();
    return a.divmod(gcd(a, b)).quotient.mul(b);
}

// Modular inverse of a mod m (throws if gcd(a, m) != 1). Iterative extended
// Euclid with explicit sign tracking.
inline BigUint BigUint::modinv(const BigUint& a, const BigUint& m) {
    BigUint r0 = m, r1 = a.mod(m);
    BigUint t0, t1(1);
    bool t0_neg = false, t1_neg = false;
    while (!r1.is_zero()) {
        DivMod dm = r0.divmod(r1);
        BigUint qt = dm.quotient.mul(t1);
        BigUint t2;
        bool t2_neg;
        if (t0_neg == t1_neg) {
            if (t0 >= qt) {
                t2 = t0.sub(qt);
                t2_neg = t0_neg;
            } else {
                t2 = qt.sub(t0);
                t2_neg = !t0_neg;
            }
        } else {
            t2 = t0.add(qt);
            t2_neg = t0_neg;
        }
        r0 = r1;
        r1 = dm.remainder;
        t0 = t1;
        t0_neg = t1_neg;
        t1 = t2;
        t1_neg = t2_neg;
    }
    if (r0 != BigUint(1)) throw std::domain_error("BigUint::modinv: not invertible");
    BigUint res = t0.mod(m);
    if (t0_neg && !res.is_zero()) res = m.sub(res);
    return res;
}

inline std::string BigUint::to_decimal() const {
    if (is_zero()) return "0";
    // Peel 19 decimal digits at a time.
    const uint64_t chunk = 10000000000000000000ull;
    BigUint v = *this;
    std::vector<uint64_t> groups;
    while (!v.is_zero()) {
        DivMod dm = v.divmod(BigUint(chunk));
        groups.push_back(dm.remainder.low_u64());
        v = dm.quotient;
    }
    std::string s = std::to_string(groups.back());
    for (size_t i = groups.size() - 1; i-- > 0;) {
        std::string part = std::to_string(groups[i]);
        s += std::string(19 - part.size(), '0') + part;
    }
    return s;
}

}  // namespace amisec
