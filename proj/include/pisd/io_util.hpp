// Little-endian binary blocks, CRC32 trailers, FNV-1a fingerprints, file helpers.
#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "pisd/errors.hpp"

namespace pisd {

uint32_t crc32(const uint8_t* data, std::size_t n);
uint64_t fnv1a64(const uint8_t* data, std::size_t n);

inline uint32_t crc32(const std::vector<uint8_t>& v) { return crc32(v.data(), v.size()); }
inline uint64_t fnv1a64(const std::vector<uint8_t>& v) { return fnv1a64(v.data(), v.size()); }

// Append-only little-endian encoder.
class ByteWriter {
  public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) { append_le(v, 2); }
    void u32(uint32_t v) { append_le(v, 4); }
    void u64(uint64_t v) { append_le(v, 8); }
    void i32(int32_t v) { append_le(static_cast<uint32_t>(v), 4); }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        append_le(bits, 8);
    }
    void bytes(const void* p, std::size_t n) {
        const uint8_t* b = static_cast<const uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    // 8-char magic tag, no terminator.
    void magic(const char* m) { bytes(m, 8); }
    void append_crc32() {
        uint32_t c = crc32(buf_);
        u32(c);
    }

    const std::vector<uint8_t>& data() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

  private:
    void append_le(uint64_t v, int nbytes) {
        for (int i = 0; i < nbytes; ++i) buf_.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
    }
    std::vector<uint8_t> buf_;
};

// Bounds-checked little-endian decoder; throws IoError on overrun.
class ByteReader {
  public:
    ByteReader(const uint8_t* p, std::size_t n) : p_(p), n_(n) {}
    explicit ByteReader(const std::vector<uint8_t>& v) : p_(v.data()), n_(v.size()) {}

    uint8_t u8() { return static_cast<uint8_t>(take_le(1)); }
    uint16_t u16() { return static_cast<uint16_t>(take_le(2)); }
    uint32_t u32() { return static_cast<uint32_t>(take_le(4)); }
    uint64_t u64() { return take_le(8); }
    int32_t i32() { return static_cast<int32_t>(take_le(4)); }
    double f64() {
        uint64_t bits = take_le(8);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void expect_magic(const char* m) {
        need(8);
        if (std::memcmp(p_ + pos_, m, 8) != 0) throw IoError(std::string("bad magic, expected ") + m);
        pos_ += 8;
    }
    // Validates a trailing CRC32 over everything before it.
    void check_crc32_trailer() {
        if (n_ < 4) throw IoError("block too short for CRC32 trailer");
        uint32_t stored = static_cast<uint32_t>(p_[n_ - 4]) | (static_cast<uint32_t>(p_[n_ - 3]) << 8) |
                          (static_cast<uint32_t>(p_[n_ - 2]) << 16) | (static_cast<uint32_t>(p_[n_ - 1]) << 24);
        if (crc32(p_, n_ - 4) != stored) throw IoError("CRC32 mismatch");
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return n_ - pos_; }

  private:
    void need(std::size_t k) const {
        if (pos_ + k > n_) throw IoError("truncated block");
    }
    uint64_t take_le(int nbytes) {
        need(static_cast<std::size_t>(nbytes));
        uint64_t v = 0;
        for (int i = 0; i < nbytes; ++i) v |= static_cast<uint64_t>(p_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(nbytes);
        return v;
    }
    const uint8_t* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pisd
