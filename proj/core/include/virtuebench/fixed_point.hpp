#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace vb {

// Q8.24 signed fixed point: 1 sign bit, 7 integer bits, 24 fractional bits.
// All network arithmetic runs on this grid so results are identical across
// platforms and runs. Raw values are kept in int32_t; intermediate products
// and sums use wider integers and are range-checked before narrowing.
inline constexpr int kFracBits = 24;
inline constexpr int64_t kFixedOne = int64_t{1} << kFracBits;
inline constexpr int32_t kFixedMax = std::numeric_limits<int32_t>::max();
inline constexpr int32_t kFixedMin = std::numeric_limits<int32_t>::min();

// Parameters are stored on a coarser grid so that serialization at the
// default 16-bit quantization is lossless: 16 bits = sign + 7 int + 8 frac,
// i.e. multiples of 2^-8.
inline constexpr int kDefaultQuantBits = 16;

class FixedOverflow : public std::runtime_error {
 public:
  explicit FixedOverflow(const std::string& what) : std::runtime_error(what) {}
};

struct Fixed {
  int32_t raw = 0;

  constexpr Fixed() = default;
  constexpr explicit Fixed(int32_t r) : raw(r) {}

  static Fixed from_double(double v) {
    double scaled = v * static_cast<double>(kFixedOne);
    if (scaled >= static_cast<double>(kFixedMax) || scaled <= static_cast<double>(kFixedMin)) {
      throw FixedOverflow("value outside Q8.24 range: " + std::to_string(v));
    }
    return Fixed(static_cast<int32_t>(scaled >= 0 ? scaled + 0.5 : scaled - 0.5));
  }
  static constexpr Fixed from_int(int v) { return Fixed(static_cast<int32_t>(v) << kFracBits); }

  double to_double() const { return static_cast<double>(raw) / static_cast<double>(kFixedOne); }

  friend constexpr bool operator==(Fixed a, Fixed b) { return a.raw == b.raw; }
  friend constexpr bool operator!=(Fixed a, Fixed b) { return a.raw != b.raw; }
  friend constexpr bool operator<(Fixed a, Fixed b) { return a.raw < b.raw; }
};

inline int32_t checked_narrow(int64_t v, const char* ctx) {
  if (v > kFixedMax || v < kFixedMin) {
    throw FixedOverflow(std::string("fixed-point overflow in ") + ctx);
  }
  return static_cast<int32_t>(v);
}

// Product of two Q8.24 raws, floor-rescaled back to Q8.24 (arithmetic shift,
// i.e. rounding toward negative infinity). Deterministic on all platforms.
inline int64_t fx_mul_raw(int64_t a, int64_t b) {
  __int128 p = static_cast<__int128>(a) * static_cast<__int128>(b);
  return static_cast<int64_t>(p >> kFracBits);
}

inline Fixed fx_mul(Fixed a, Fixed b) {
  return Fixed(checked_narrow(fx_mul_raw(a.raw, b.raw), "fx_mul"));
}

// (num / den) in Q8.24, truncated toward zero. den must be nonzero.
inline int64_t fx_div_raw(int64_t num, int64_t den) {
  __int128 n = static_cast<__int128>(num) << kFracBits;
  return static_cast<int64_t>(n / den);
}

// Round a raw Q8.24 value to the grid representable with `quant_bits` total
// bits (sign + 7 int + (quant_bits-8) frac). Round-half-away-from-zero.
inline int32_t quantize_raw(int64_t raw, int quant_bits) {
  int drop = 32 - quant_bits;
  if (drop <= 0) return checked_narrow(raw, "quantize_raw");
  int64_t step = int64_t{1} << drop;
  int64_t half = step / 2;
  int64_t q = raw >= 0 ? (raw + half) / step : -((-raw + half) / step);
  int64_t lo = -(int64_t{1} << (quant_bits - 1));
  int64_t hi = (int64_t{1} << (quant_bits - 1)) - 1;
  if (q < lo) q = lo;
  if (q > hi) q = hi;
  return static_cast<int32_t>(q * step);
}

// Two's-complement encode/decode of a grid value into `quant_bits` bits.
inline uint64_t encode_quantized(int32_t raw, int quant_bits) {
  int drop = 32 - quant_bits;
  int64_t q = drop > 0 ? (static_cast<int64_t>(raw) >> drop) : raw;
  uint64_t mask = quant_bits >= 64 ? ~uint64_t{0} : ((uint64_t{1} << quant_bits) - 1);
  return static_cast<uint64_t>(q) & mask;
}

inline int32_t decode_quantized(uint64_t bits, int quant_bits) {
  uint64_t sign_bit = uint64_t{1} << (quant_bits - 1);
  int64_t q = static_cast<int64_t>(bits & ((sign_bit << 1) - 1));
  if (q & static_cast<int64_t>(sign_bit)) q -= static_cast<int64_t>(sign_bit << 1);
  int drop = 32 - quant_bits;
  return static_cast<int32_t>(drop > 0 ? (q << drop) : q);
}

}  // namespace vb
