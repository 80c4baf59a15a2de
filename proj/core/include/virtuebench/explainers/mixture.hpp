#pragma once

#include <vector>

#include "virtuebench/explanation.hpp"

namespace vb {

enum class HypothesisKind : uint8_t { Majority, Parity, Const0, Const1, ModAdd };

uint8_t hypothesis_label(HypothesisKind h, uint16_t input, int width, int label_count);

struct Hypothesis {
  HypothesisKind kind;
  uint32_t prior_weight;  // categorical prior = weight / sum of weights
};

// Weighted mixture over global candidate programs with symmetric label noise
// eta: the hypothesis' label with probability 1 - eta, otherwise uniform over
// the wrong labels. The joint likelihood marginalizes over the hypothesis
// once per dataset, which is what makes co-explanation and unification
// non-zero for this family.
class MixtureExplanation final : public Explanation {
 public:
  MixtureExplanation(int input_width, int label_count, std::vector<Hypothesis> hypotheses,
                     uint32_t eta_q17);

  Family family() const override { return Family::Mixture; }
  int input_width() const override { return n_; }
  int label_count() const override { return label_count_; }
  std::vector<double> predict(uint16_t input_bits) const override;
  LogLik joint_log2(std::span<const Observation> obs) const override;
  SymbolStream to_stream(const BackgroundTheory& b) const override;
  int entity_count() const override { return static_cast<int>(hypotheses_.size()); }
  bool nomological() const override { return true; }
  bool internal_constraints_ok() const override;
  EditAlphabet edit_alphabet(const BackgroundTheory& b) const override;

  const std::vector<Hypothesis>& hypotheses() const { return hypotheses_; }
  double eta() const;     // eta_q17 / 2^17, in [0, 0.5)
  double prior(size_t hypothesis_index) const;
  uint32_t eta_q17() const { return eta_q17_; }

  // P(y | x, h, eta)
  double label_prob(size_t hypothesis_index, uint16_t input, uint8_t label) const;

  static ExplanationPtr from_source(FieldSource& src, const BackgroundTheory& b,
                                    const DecodeContext& ctx);

 private:
  int n_;
  int label_count_;
  std::vector<Hypothesis> hypotheses_;
  uint32_t eta_q17_;
  uint64_t weight_sum_;
};

}  // namespace vb
