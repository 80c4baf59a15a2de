#pragma once

#include <cstdint>
#include <vector>

#include "virtuebench/errors.hpp"

namespace vb {

// MSB-first bit packing. Bit counts, not byte counts, are the unit of
// description length everywhere, so the writer tracks the exact bit length.
class BitWriter {
 public:
  void put_bit(bool b) {
    size_t byte = nbits_ >> 3;
    if (byte >= bytes_.size()) bytes_.push_back(0);
    if (b) bytes_[byte] |= static_cast<uint8_t>(0x80u >> (nbits_ & 7));
    ++nbits_;
  }

  void put_bits(uint64_t value, int width) {
    for (int i = width - 1; i >= 0; --i) put_bit((value >> i) & 1);
  }

  uint64_t bit_length() const { return nbits_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
  uint64_t nbits_ = 0;
};

class BitReader {
 public:
  BitReader(const uint8_t* data, uint64_t nbits) : data_(data), nbits_(nbits) {}
  explicit BitReader(const std::vector<uint8_t>& bytes)
      : data_(bytes.data()), nbits_(static_cast<uint64_t>(bytes.size()) * 8) {}

  bool get_bit() {
    if (pos_ >= nbits_) throw DecodeError("bit stream exhausted");
    bool b = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return b;
  }

  uint64_t get_bits(int width) {
    uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 1) | static_cast<uint64_t>(get_bit());
    return v;
  }

  uint64_t position() const { return pos_; }
  uint64_t remaining() const { return nbits_ - pos_; }

 private:
  const uint8_t* data_;
  uint64_t nbits_;
  uint64_t pos_ = 0;
};

}  // namespace vb
