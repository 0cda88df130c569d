#pragma once

#include <cstddef>
#include <cstdint>

#include "seco/common/prng.hpp"

namespace seco::gc {

// 128-bit wire label. The low bit of `lo` is the point-and-permute bit.
struct Block {
    uint64_t lo = 0, hi = 0;

    Block operator^(const Block& o) const { return {lo ^ o.lo, hi ^ o.hi}; }
    Block& operator^=(const Block& o) {
        lo ^= o.lo;
        hi ^= o.hi;
        return *this;
    }
    bool operator==(const Block&) const = default;
    bool permute_bit() const { return lo & 1; }

    static Block random(Prng& rng) { return {rng.next_u64(), rng.next_u64()}; }
};
static_assert(sizeof(Block) == 16);

// Multiplication by x in GF(2^128) modulo x^128 + x^7 + x^2 + x + 1.
inline Block gf_double(const Block& b) {
    const uint64_t carry = b.hi >> 63;
    return {(b.lo << 1) ^ (carry * 0x87), (b.hi << 1) | (b.lo >> 63)};
}

// AES-128 under a public fixed key, used as a random permutation.
// Thread-safe: each thread keeps its own cipher context.
void aes_fixed_key(const Block* in, Block* out, size_t n);

// Correlation-robust hash H(x) = pi(x) ^ x, applied blockwise in place.
void hash_blocks(Block* x, size_t n);

}  // namespace seco::gc
