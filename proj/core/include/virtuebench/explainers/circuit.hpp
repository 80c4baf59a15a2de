#pragma once

#include <memory>
#include <vector>

#include "virtuebench/explanation.hpp"

namespace vb {

enum class AblationValue : uint8_t { Zero, MeanOverInputs };

// Subgraph of the model: a boolean mask over edges. Prediction runs the net
// with masked edges ablated (source activation replaced by zero or by its
// mean over all inputs). Mean values are part of the explanation and are
// serialized with it.
class CircuitExplanation final : public Explanation {
 public:
  CircuitExplanation(std::shared_ptr<const ToyNet> net, std::vector<bool> edge_mask,
                     AblationValue ablation,
                     std::vector<std::vector<int32_t>> unit_ablation_values);

  // Convenience: derives ablation values from the net (zeros or means).
  static std::shared_ptr<const CircuitExplanation> make(std::shared_ptr<const ToyNet> net,
                                                        std::vector<bool> edge_mask,
                                                        AblationValue ablation);

  Family family() const override { return Family::Circuit; }
  int input_width() const override { return net_->input_width(); }
  int label_count() const override { return net_->label_count(); }
  std::vector<double> predict(uint16_t input_bits) const override;
  SymbolStream to_stream(const BackgroundTheory& b) const override;
  // Number of units incident to at least one active edge.
  int entity_count() const override;
  bool internal_constraints_ok() const override;
  EditAlphabet edit_alphabet(const BackgroundTheory& b) const override;

  const std::vector<bool>& edge_mask() const { return mask_; }
  AblationValue ablation() const { return ablation_; }
  const std::vector<std::vector<int32_t>>& unit_ablation_values() const { return ablation_values_; }
  const std::shared_ptr<const ToyNet>& net() const { return net_; }
  int active_edge_count() const;

  uint8_t masked_label(uint16_t input_bits) const;

  static ExplanationPtr from_source(FieldSource& src, const BackgroundTheory& b,
                                    const DecodeContext& ctx);

 private:
  std::shared_ptr<const ToyNet> net_;
  std::vector<bool> mask_;
  AblationValue ablation_;
  std::vector<std::vector<int32_t>> ablation_values_;
};

struct FcmScores {
  double faithfulness;                  // F(C): agreement of circuit with model
  double incompleteness_max;            // max_K |F(C\K) - F(M\K)|
  std::vector<double> minimality;       // per active edge, in edge-index order
  std::vector<int> minimality_edges;    // active edge ids aligned with `minimality`
  bool exhaustive;                      // all subsets enumerated (2^|C| <= 4096)
};

// F(S) = agreement rate of the net with edges outside S ablated against the
// full net, over all enumerated inputs. Subsets are enumerated exhaustively
// when 2^|C| <= 4096, otherwise `subset_budget` seeded random subsets are
// drawn per score.
FcmScores fcm_scores(const CircuitExplanation& circuit, int subset_budget, uint64_t seed = 17);

// Greedy ablate-least-damage discovery: starting from the full graph, remove
// the edge whose removal degrades F the least while F stays >= 1 - tau;
// ties break to the lowest edge index.
std::shared_ptr<const CircuitExplanation> discover_circuit(std::shared_ptr<const ToyNet> net,
                                                           double tau,
                                                           AblationValue ablation =
                                                               AblationValue::MeanOverInputs);

}  // namespace vb
