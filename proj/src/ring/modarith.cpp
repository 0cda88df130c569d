#include "seco/ring/modarith.hpp"

#include <bit>

#include "seco/common/error.hpp"

namespace seco::ring {

Modulus::Modulus(uint64_t q) : q_(q) {
    if (q < 2 || q >= (uint64_t(1) << 62)) throw ConfigError("modulus out of range");
    bits_ = std::bit_width(q);
    // floor(2^128 / q) = floor((2^128 - 1) / q) unless q | 2^128, impossible for odd q > 1.
    u128 all = ~u128(0);
    u128 r = all / q;
    ratio_hi_ = static_cast<uint64_t>(r >> 64);
    ratio_lo_ = static_cast<uint64_t>(r);
}

uint64_t Modulus::reduce(u128 z) const {
    uint64_t zl = static_cast<uint64_t>(z), zh = static_cast<uint64_t>(z >> 64);
    // High 128 bits of z * ratio, truncated to the 64 bits that matter for z < 2^124.
    u128 mid = u128(zh) * ratio_lo_ + u128(zl) * ratio_hi_ + mulhi64(zl, ratio_lo_);
    uint64_t quot = zh * ratio_hi_ + static_cast<uint64_t>(mid >> 64);
    uint64_t r = zl - quot * q_;
    while (r >= q_) r -= q_;
    return r;
}

uint64_t Modulus::pow(uint64_t base, uint64_t exp) const {
    uint64_t result = 1 % q_, b = reduce(base);
    while (exp) {
        if (exp & 1) result = mul(result, b);
        b = mul(b, b);
        exp >>= 1;
    }
    return result;
}

uint64_t Modulus::inv(uint64_t a) const {
    if (reduce(a) == 0) throw ConfigError("inverse of zero");
    return pow(a, q_ - 2);
}


bool is_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    auto mulmod = [n](uint64_t a, uint64_t b) { return static_cast<uint64_t>(u128(a) * b % n); };
    auto powmod = [&](uint64_t b, uint64_t e) {
        uint64_t r = 1;
        while (e) {
            if (e & 1) r = mulmod(r, b);
            b = mulmod(b, b);
            e >>= 1;
        }
        return r;
    };
    // Deterministic witness set for 64-bit integers.
    for (uint64_t a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
        a %= n;
        if (a == 0) continue;
        uint64_t x = powmod(a, d);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

uint64_t find_primitive_root(uint64_t two_n, const Modulus& q) {
    uint64_t qv = q.value();
    if ((qv - 1) % two_n != 0) throw ConfigError("modulus is not 1 mod 2n");
    for (uint64_t g = 2; g < qv; ++g) {
        uint64_t root = q.pow(g, (qv - 1) / two_n);
        // Order exactly 2n iff root^n = -1.
        if (q.pow(root, two_n / 2) == qv - 1) return root;
    }
    throw ConfigError("no primitive root found");
}

}  // namespace seco::ring
