#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "virtuebench/bitstream.hpp"
#include "virtuebench/errors.hpp"
#include "virtuebench/symbols.hpp"

namespace vb {

// A prefix-free coding scheme over the grammar symbols. Code lengths must
// satisfy the Kraft inequality; concrete codewords are assigned canonically
// from the lengths so encoding is bit-exact across runs and platforms.
class BackgroundTheory {
 public:
  BackgroundTheory(std::map<std::string, int> codebook, int quantization_bits,
                   std::string version);

  static BackgroundTheory default_theory();
  static BackgroundTheory from_json_file(const std::string& path, int quantization_bits = 16,
                                         const std::string& version = "file");
  static BackgroundTheory from_json_text(const std::string& text, int quantization_bits = 16,
                                         const std::string& version = "inline");

  const std::map<std::string, int>& codebook() const { return codebook_; }
  int quantization_bits() const { return quantization_bits_; }
  const std::string& version() const { return version_; }

  // Kraft sum over the codebook, Σ 2^-len.
  double kraft_sum() const;

  bool has_symbol(Sym s) const { return code_len_[static_cast<size_t>(s)] > 0; }
  int code_length(Sym s) const;

  void encode_symbol(BitWriter& w, Sym s) const;
  Sym decode_symbol(BitReader& r) const;

  // Coding scheme conditioned on an explanation: the symbols that appear in
  // `used_counts` are re-coded from their empirical frequencies, every other
  // symbol is lengthened until the Kraft inequality holds again. This is how
  // P(H | E, B) is realized: hypotheses made of E's vocabulary get shorter,
  // foreign hypotheses get longer.
  BackgroundTheory extended_with_counts(const std::map<Sym, uint64_t>& used_counts) const;

 private:
  void build_codes();

  std::map<std::string, int> codebook_;
  int quantization_bits_;
  std::string version_;

  std::array<int, kSymCount> code_len_{};       // 0 = symbol absent
  std::array<uint32_t, kSymCount> code_bits_{}, code_width_{};
  // decode table: (length, canonical value) -> symbol
  std::map<std::pair<int, uint32_t>, Sym> decode_map_;
};

}  // namespace vb
