#include "seco/common/bytes.hpp"

#include <bit>

namespace seco {

void ByteWriter::put_le(uint64_t v, unsigned width) {
    for (unsigned i = 0; i < width; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::raw(const void* p, size_t len) {
    auto b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + len);
}

void ByteWriter::blob(std::span<const uint8_t> s) {
    if (s.size() > UINT32_MAX) throw SerializationError("blob too large");
    u32(static_cast<uint32_t>(s.size()));
    raw(s);
}

void ByteWriter::u64_array(std::span<const uint64_t> v) {
    u32(static_cast<uint32_t>(v.size()));
    u64_values(v);
}

void ByteWriter::u64_values(std::span<const uint64_t> v) {
    size_t off = buf_.size();
    buf_.resize(off + 8 * v.size());
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(buf_.data() + off, v.data(), 8 * v.size());
    } else {
        for (size_t i = 0; i < v.size(); ++i)
            for (int b = 0; b < 8; ++b) buf_[off + 8 * i + b] = static_cast<uint8_t>(v[i] >> (8 * b));
    }
}

void ByteWriter::packed(std::span<const uint64_t> v, unsigned width) {
    size_t off = buf_.size();
    buf_.resize(off + width * v.size());
    uint8_t* out = buf_.data() + off;
    for (uint64_t x : v) {
        if (width < 8 && (x >> (8 * width)) != 0) throw SerializationError("value exceeds packed width");
        for (unsigned b = 0; b < width; ++b) *out++ = static_cast<uint8_t>(x >> (8 * b));
    }
}

uint64_t ByteReader::get_le(unsigned width) {
    if (remaining() < width) throw SerializationError("truncated input");
    uint64_t v = 0;
    for (unsigned i = 0; i < width; ++i) v |= uint64_t(data_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
}

std::span<const uint8_t> ByteReader::raw(size_t len) {
    if (remaining() < len) throw SerializationError("truncated input");
    auto s = data_.subspan(pos_, len);
    pos_ += len;
    return s;
}

std::span<const uint8_t> ByteReader::blob() { return raw(u32()); }

std::vector<uint64_t> ByteReader::u64_array() {
    uint32_t count = u32();
    if (size_t(count) * 8 > remaining()) throw SerializationError("truncated input");
    std::vector<uint64_t> v(count);
    u64_values(v);
    return v;
}

void ByteReader::u64_values(std::span<uint64_t> v) {
    const size_t count = v.size();
    auto s = raw(count * 8);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(v.data(), s.data(), s.size());
    } else {
        for (size_t i = 0; i < count; ++i)
            for (int b = 0; b < 8; ++b) v[i] |= uint64_t(s[8 * i + b]) << (8 * b);
    }
}

std::vector<uint64_t> ByteReader::packed(size_t count, unsigned width) {
    auto s = raw(count * width);
    std::vector<uint64_t> v(count);
    const uint8_t* p = s.data();
    for (size_t i = 0; i < count; ++i) {
        uint64_t x = 0;
        for (unsigned b = 0; b < width; ++b) x |= uint64_t(*p++) << (8 * b);
        v[i] = x;
    }
    return v;
}

void ByteReader::expect_done() const {
    if (!done()) throw SerializationError("trailing bytes");
}

unsigned packed_width(uint64_t modulus) {
    unsigned bits = std::bit_width(modulus - 1);
    return bits == 0 ? 1 : (bits + 7) / 8;
}

std::string to_hex(std::span<const uint8_t> s) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * s.size());
    for (uint8_t b : s) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 15]);
    }
    return out;
}

}  // namespace seco
