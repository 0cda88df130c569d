#include "seco/common/prng.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace seco {

namespace {
struct SodiumInit {
    SodiumInit() {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
    }
};
const SodiumInit sodium_once;
}  // namespace

Prng::Prng(const Key& key) : key_(key) {}

Prng::Prng(uint64_t seed) {
    uint8_t in[16] = {'s', 'e', 'c', 'o', '-', 's', 'e', 'e', 'd'};
    for (int i = 0; i < 8; ++i) in[8 + i] ^= static_cast<uint8_t>(seed >> (8 * i));
    crypto_generichash(key_.data(), key_.size(), in, sizeof(in), nullptr, 0);
}

Prng Prng::from_os() {
    Key k;
    randombytes_buf(k.data(), k.size());
    return Prng(k);
}

Prng Prng::derive(std::string_view label, uint64_t index) const {
    crypto_generichash_state st;
    crypto_generichash_init(&st, key_.data(), key_.size(), 32);
    crypto_generichash_update(&st, reinterpret_cast<const uint8_t*>(label.data()), label.size());
    uint8_t idx[8];
    for (int i = 0; i < 8; ++i) idx[i] = static_cast<uint8_t>(index >> (8 * i));
    crypto_generichash_update(&st, idx, sizeof(idx));
    Key k;
    crypto_generichash_final(&st, k.data(), k.size());
    return Prng(k);
}

void Prng::refill() {
    // 64-byte ChaCha blocks; the block counter doubles as the position in the stream.
    static const uint8_t nonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
    std::memset(buf_.data(), 0, buf_.size());
    crypto_stream_chacha20_ietf_xor_ic(buf_.data(), buf_.data(), buf_.size(), nonce,
                                       static_cast<uint32_t>(block_), key_.data());
    block_ += buf_.size() / 64;
    if (block_ > UINT32_MAX) throw std::runtime_error("prng stream exhausted");
    pos_ = 0;
}

void Prng::fill(void* out, size_t len) {
    auto* o = static_cast<uint8_t*>(out);
    while (len > 0) {
        if (pos_ == buf_.size()) refill();
        size_t take = std::min(len, buf_.size() - pos_);
        std::memcpy(o, buf_.data() + pos_, take);
        pos_ += take;
        o += take;
        len -= take;
    }
}

uint64_t Prng::next_u64_slow() {
    uint64_t v;
    fill(&v, sizeof(v));
    return v;
}

uint64_t Prng::uniform(uint64_t bound) {
    if (bound <= 1) return 0;
    uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
        uint64_t v = next_u64();
        if (v < limit) return v % bound;
    }
}

}  // namespace seco
