#pragma once

#include <memory>
#include <vector>

#include "virtuebench/explanation.hpp"

namespace vb {

struct SparseCoef {
  uint8_t atom;
  int32_t magnitude;  // raw Q8.24, on the mag_bits grid
};

// Sparse linear decomposition of one hidden layer's activations. Codes are
// stored for every enumerated input; prediction reconstructs the activation
// from the code and runs the rest of the net forward from there.
class DictionaryExplanation final : public Explanation {
 public:
  DictionaryExplanation(std::shared_ptr<const ToyNet> net, int layer_index, int max_l0,
                        int mag_bits, std::vector<std::vector<int32_t>> atoms,
                        std::vector<std::vector<SparseCoef>> codes);

  Family family() const override { return Family::Dictionary; }
  int input_width() const override { return net_->input_width(); }
  int label_count() const override { return net_->label_count(); }
  std::vector<double> predict(uint16_t input_bits) const override;
  SymbolStream to_stream(const BackgroundTheory& b) const override;
  // Atoms with at least one nonzero coefficient anywhere in the codes.
  int entity_count() const override;
  bool internal_constraints_ok() const override;
  EditAlphabet edit_alphabet(const BackgroundTheory& b) const override;

  int layer_index() const { return layer_index_; }
  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int max_l0() const { return max_l0_; }
  int mag_bits() const { return mag_bits_; }
  const std::vector<std::vector<int32_t>>& atoms() const { return atoms_; }
  const std::vector<std::vector<SparseCoef>>& codes() const { return codes_; }

  std::vector<int32_t> reconstruct(uint16_t input_bits) const;
  // Squared reconstruction error (raw Q8.24 value units) per input.
  double reconstruction_error(uint16_t input_bits) const;

  // Bit cost of the stored codes under the family's scheme: per input a 4-bit
  // count, per active coefficient ceil(log2(atom_count)) index bits plus
  // mag_bits. Dictionary matrix cost is reported separately.
  uint64_t code_bits() const;
  uint64_t dictionary_bits(const BackgroundTheory& b) const;

  static ExplanationPtr from_source(FieldSource& src, const BackgroundTheory& b,
                                    const DecodeContext& ctx);

 private:
  std::shared_ptr<const ToyNet> net_;
  int layer_index_;
  int max_l0_;
  int mag_bits_;
  std::vector<std::vector<int32_t>> atoms_;          // atom x width, raw Q8.24 on grid
  std::vector<std::vector<SparseCoef>> codes_;       // per enumerated input
};

// Alternating greedy matching pursuit and per-atom least-squares updates,
// 50 rounds, all in fixed point. Zero-norm atoms are re-seeded from the
// largest current residual. Atoms end on the 16-bit grid, codes on the
// mag_bits grid.
std::shared_ptr<const DictionaryExplanation> fit_dictionary(std::shared_ptr<const ToyNet> net,
                                                            int layer_index, int atom_count,
                                                            int max_l0, uint64_t seed,
                                                            int mag_bits = 16,
                                                            bool identity_init = false);

}  // namespace vb
