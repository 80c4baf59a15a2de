#pragma once

#include <cstdint>
#include <vector>

#include "virtuebench/background_theory.hpp"
#include "virtuebench/errors.hpp"
#include "virtuebench/symbols.hpp"

namespace vb {

// One field of a serialized explanation: either a coded grammar symbol or a
// fixed-width literal (quantized parameter, count, index). Edit operations
// act on fields, not raw bits; raw-bit edits would almost never decode.
struct Field {
  enum class Kind : uint8_t { Symbol, Literal };
  Kind kind;
  Sym sym = Sym::Count_;   // valid when kind == Symbol
  uint64_t value = 0;      // valid when kind == Literal
  uint8_t width = 0;       // literal width in bits

  static Field symbol(Sym s) { return Field{Kind::Symbol, s, 0, 0}; }
  static Field literal(uint64_t v, int w) {
    return Field{Kind::Literal, Sym::Count_, v, static_cast<uint8_t>(w)};
  }

  friend bool operator==(const Field& a, const Field& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::Symbol) return a.sym == b.sym;
    return a.value == b.value && a.width == b.width;
  }
};

using SymbolStream = std::vector<Field>;

// Exact serialized length in bits under a theory: conciseness.
uint64_t stream_bit_length(const SymbolStream& s, const BackgroundTheory& b);

// Pack a stream into bits / unpack bits into a stream requires grammar
// knowledge (literal widths), so unpacking is driven by the family decoders
// through FieldSource below. Packing is generic.
std::vector<uint8_t> pack_stream(const SymbolStream& s, const BackgroundTheory& b,
                                 uint64_t* bit_length);

// Uniform way for family decoders to consume fields from either packed bits
// or an in-memory (possibly edited) stream. Any mismatch between what the
// grammar expects and what is present raises DecodeError.
class FieldSource {
 public:
  virtual ~FieldSource() = default;
  virtual Sym next_symbol() = 0;
  virtual uint64_t next_literal(int width) = 0;
  virtual bool exhausted() const = 0;
  void expect_end() const {
    if (!exhausted()) throw DecodeError("trailing fields after explanation");
  }
};

class BitFieldSource final : public FieldSource {
 public:
  BitFieldSource(BitReader reader, const BackgroundTheory& theory)
      : reader_(reader), theory_(theory) {}
  Sym next_symbol() override { return theory_.decode_symbol(reader_); }
  uint64_t next_literal(int width) override {
    if (reader_.remaining() < static_cast<uint64_t>(width)) {
      throw DecodeError("bit stream too short for literal");
    }
    return reader_.get_bits(width);
  }
  bool exhausted() const override { return reader_.remaining() == 0; }

 private:
  BitReader reader_;
  const BackgroundTheory& theory_;
};

class StreamFieldSource final : public FieldSource {
 public:
  explicit StreamFieldSource(const SymbolStream& s) : stream_(s) {}
  Sym next_symbol() override {
    const Field& f = next();
    if (f.kind != Field::Kind::Symbol) throw DecodeError("expected symbol, found literal");
    return f.sym;
  }
  uint64_t next_literal(int width) override {
    const Field& f = next();
    if (f.kind != Field::Kind::Literal) throw DecodeError("expected literal, found symbol");
    if (f.width != width) throw DecodeError("literal width mismatch");
    return f.value;
  }
  bool exhausted() const override { return pos_ >= stream_.size(); }

 private:
  const Field& next() {
    if (pos_ >= stream_.size()) throw DecodeError("stream exhausted");
    return stream_[pos_++];
  }
  const SymbolStream& stream_;
  size_t pos_ = 0;
};

// Counts per grammar symbol in a stream, used for adhocness conditioning.
std::map<Sym, uint64_t> symbol_counts(const SymbolStream& s);

}  // namespace vb
