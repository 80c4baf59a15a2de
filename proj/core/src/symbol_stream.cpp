#include "virtuebench/symbol_stream.hpp"

namespace vb {

uint64_t stream_bit_length(const SymbolStream& s, const BackgroundTheory& b) {
  uint64_t bits = 0;
  for (const Field& f : s) {
    if (f.kind == Field::Kind::Symbol) {
      bits += static_cast<uint64_t>(b.code_length(f.sym));
    } else {
      bits += f.width;
    }
  }
  return bits;
}

std::vector<uint8_t> pack_stream(const SymbolStream& s, const BackgroundTheory& b,
                                 uint64_t* bit_length) {
  BitWriter w;
  for (const Field& f : s) {
    if (f.kind == Field::Kind::Symbol) {
      b.encode_symbol(w, f.sym);
    } else {
      w.put_bits(f.value, f.width);
    }
  }
  if (bit_length) *bit_length = w.bit_length();
  return w.bytes();
}

std::map<Sym, uint64_t> symbol_counts(const SymbolStream& s) {
  std::map<Sym, uint64_t> counts;
  for (const Field& f : s) {
    if (f.kind == Field::Kind::Symbol) ++counts[f.sym];
  }
  return counts;
}

}  // namespace vb
