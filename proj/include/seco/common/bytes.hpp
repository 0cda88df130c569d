#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "seco/common/error.hpp"

namespace seco {

using Bytes = std::vector<uint8_t>;

// Little-endian append-only writer.
class ByteWriter {
public:
    ByteWriter() = default;
    explicit ByteWriter(size_t reserve) { buf_.reserve(reserve); }

    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) { put_le(v, 2); }
    void u32(uint32_t v) { put_le(v, 4); }
    void u64(uint64_t v) { put_le(v, 8); }
    void raw(const void* p, size_t len);
    void raw(std::span<const uint8_t> s) { raw(s.data(), s.size()); }
    // u32 length prefix followed by the bytes.
    void blob(std::span<const uint8_t> s);
    void u64_array(std::span<const uint64_t> v);
    void u64_values(std::span<const uint64_t> v);  // no length prefix
    // Fixed-width packing of values known to fit in `width` bytes.
    void packed(std::span<const uint64_t> v, unsigned width);

    size_t size() const { return buf_.size(); }
    Bytes take() { return std::move(buf_); }
    const Bytes& bytes() const { return buf_; }

private:
    void put_le(uint64_t v, unsigned width);
    Bytes buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> s) : data_(s) {}

    uint8_t u8() { return static_cast<uint8_t>(get_le(1)); }
    uint16_t u16() { return static_cast<uint16_t>(get_le(2)); }
    uint32_t u32() { return static_cast<uint32_t>(get_le(4)); }
    uint64_t u64() { return get_le(8); }
    std::span<const uint8_t> raw(size_t len);
    std::span<const uint8_t> blob();
    std::vector<uint64_t> u64_array();
    void u64_values(std::span<uint64_t> out);
    std::vector<uint64_t> packed(size_t count, unsigned width);

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }
    void expect_done() const;

private:
    uint64_t get_le(unsigned width);
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

// Bytes needed to hold any residue below `modulus`.
unsigned packed_width(uint64_t modulus);

std::string to_hex(std::span<const uint8_t> s);

}  // namespace seco
