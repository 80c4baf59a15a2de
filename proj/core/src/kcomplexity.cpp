#include "virtuebench/kcomplexity.hpp"

#include <stdexcept>

#include <zlib.h>

namespace vb {

uint64_t compressed_bits(const std::vector<uint8_t>& bytes) {
  uLongf bound = compressBound(static_cast<uLong>(bytes.size()));
  std::vector<uint8_t> out(bound);
  uLongf out_len = bound;
  int rc = compress2(out.data(), &out_len, bytes.data(), static_cast<uLong>(bytes.size()),
                     Z_BEST_COMPRESSION);
  if (rc != Z_OK) throw std::runtime_error("zlib compress2 failed");
  return static_cast<uint64_t>(out_len) * 8;
}

uint64_t k_complexity_bits_for(const std::vector<uint8_t>& payload, uint64_t raw_bits) {
  return std::min(raw_bits, compressed_bits(payload) + kDecompressorStubBits);
}

}  // namespace vb
