#pragma once

#include <cstdint>
#include <vector>

namespace vb {

// Fixed charge for the decompressor stub when complexity is estimated via
// general-purpose compression.
inline constexpr uint64_t kDecompressorStubBits = 256;

// DEFLATE (zlib, level 9) size of the payload in bits. A compression-based
// upper-bound proxy: true program-length complexity is not computable.
uint64_t compressed_bits(const std::vector<uint8_t>& bytes);

// min(raw_bits, compressed_bits + stub constant)
uint64_t k_complexity_bits_for(const std::vector<uint8_t>& payload, uint64_t raw_bits);

}  // namespace vb
