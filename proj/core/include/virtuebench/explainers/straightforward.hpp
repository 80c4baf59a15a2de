#pragma once

#include <memory>

#include "virtuebench/explanation.hpp"

namespace vb {

// The model's parameters verbatim: a maximally accurate surrogate with no
// compression at all. Self-contained -- it carries its own copy of the net.
class StraightforwardExplanation final : public Explanation {
 public:
  explicit StraightforwardExplanation(std::shared_ptr<const ToyNet> net);

  Family family() const override { return Family::Straightforward; }
  int input_width() const override { return net_->input_width(); }
  int label_count() const override { return net_->label_count(); }
  std::vector<double> predict(uint16_t input_bits) const override;
  SymbolStream to_stream(const BackgroundTheory& b) const override;
  int entity_count() const override { return static_cast<int>(net_->parameter_count()); }
  bool internal_constraints_ok() const override { return true; }
  EditAlphabet edit_alphabet(const BackgroundTheory& b) const override;

  const std::shared_ptr<const ToyNet>& net() const { return net_; }

  // Bits before the parameter block: family tag + depth + layer sizes +
  // activation symbol.
  static uint64_t header_bits(const ToyNet& net, const BackgroundTheory& b);

  static ExplanationPtr from_source(FieldSource& src, const BackgroundTheory& b,
                                    const DecodeContext& ctx);

 private:
  std::shared_ptr<const ToyNet> net_;
};

std::shared_ptr<const StraightforwardExplanation> straightforward(
    std::shared_ptr<const ToyNet> net);

}  // namespace vb
