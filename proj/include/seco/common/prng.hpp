#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace seco {

// Deterministic ChaCha20 keystream. Each party derives its own stream from a
// run seed so runs are reproducible without sharing generator state.
class Prng {
public:
    using Key = std::array<uint8_t, 32>;

    explicit Prng(const Key& key);
    explicit Prng(uint64_t seed);
    // Seed from the OS entropy source.
    static Prng from_os();

    // Independent child stream keyed by (this key, label, index).
    Prng derive(std::string_view label, uint64_t index = 0) const;

    void fill(void* out, size_t len);
    uint64_t next_u64() {
        if (pos_ + 8 > buf_.size()) [[unlikely]]
            return next_u64_slow();
        uint64_t v;
        std::memcpy(&v, buf_.data() + pos_, 8);
        pos_ += 8;
        return v;
    }
    // Uniform in [0, bound) by rejection.
    uint64_t uniform(uint64_t bound);
    bool bit() { return next_u64() & 1; }

    const Key& key() const { return key_; }

private:
    void refill();
    uint64_t next_u64_slow();

    Key key_{};
    uint64_t block_ = 0;
    std::array<uint8_t, 4096> buf_{};
    size_t pos_ = sizeof(buf_);
};

}  // namespace seco
