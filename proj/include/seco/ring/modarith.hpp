#pragma once

#include <cstdint>

namespace seco::ring {

using u128 = unsigned __int128;

inline uint64_t mulhi64(uint64_t a, uint64_t b) { return static_cast<uint64_t>((u128(a) * b) >> 64); }

// Prime modulus below 2^62 with a precomputed Barrett constant floor(2^128 / q).
class Modulus {
public:
    Modulus() = default;
    explicit Modulus(uint64_t q);

    uint64_t value() const { return q_; }
    int bits() const { return bits_; }

    uint64_t add(uint64_t a, uint64_t b) const {
        uint64_t s = a + b;
        return s >= q_ ? s - q_ : s;
    }
    uint64_t sub(uint64_t a, uint64_t b) const { return a >= b ? a - b : a + q_ - b; }
    uint64_t neg(uint64_t a) const { return a == 0 ? 0 : q_ - a; }
    uint64_t reduce(u128 z) const;
    uint64_t reduce(uint64_t a) const { return a >= q_ ? a % q_ : a; }
    uint64_t mul(uint64_t a, uint64_t b) const { return reduce(u128(a) * b); }
    uint64_t pow(uint64_t base, uint64_t exp) const;
    uint64_t inv(uint64_t a) const;  // q prime
    // Maps a signed value into [0, q).
    uint64_t from_signed(int64_t v) const {
        if (v >= 0) return reduce(static_cast<uint64_t>(v));
        uint64_t m = reduce(static_cast<uint64_t>(-(v + 1)) + 1);
        return m == 0 ? 0 : q_ - m;
    }
    // Centered representative in [-q/2, q/2).
    int64_t to_signed(uint64_t a) const { return a >= (q_ + 1) / 2 ? int64_t(a) - int64_t(q_) : int64_t(a); }

private:
    uint64_t q_ = 0;
    uint64_t ratio_hi_ = 0, ratio_lo_ = 0;
    int bits_ = 0;
};

// Shoup multiplication by a fixed operand w with precomputed floor(w * 2^64 / q).
inline uint64_t shoup_precompute(uint64_t w, uint64_t q) { return static_cast<uint64_t>((u128(w) << 64) / q); }
inline uint64_t mul_shoup(uint64_t x, uint64_t w, uint64_t w_shoup, uint64_t q) {
    uint64_t hi = mulhi64(x, w_shoup);
    uint64_t r = x * w - hi * q;
    return r >= q ? r - q : r;
}

bool is_prime(uint64_t n);
// Smallest-generator primitive 2n-th root of unity mod prime q (requires q = 1 mod 2n).
uint64_t find_primitive_root(uint64_t two_n, const Modulus& q);

}  // namespace seco::ring
