#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "virtuebench/fixed_point.hpp"
#include "virtuebench/observation.hpp"
#include "virtuebench/rng.hpp"

namespace vb {

enum class Activation : uint8_t { Relu, Identity };

enum class TaskName { Majority8, Parity8, ModAdd7 };

struct TaskSpec {
  TaskName name;
  int n;            // input width
  int label_count;  // |L|
  std::string id;   // "majority8" | "parity8" | "modadd7"
};

TaskSpec task_by_name(const std::string& id);
uint8_t task_label(const TaskSpec& task, uint16_t input);
std::vector<int> default_arch(const TaskSpec& task);

// An edge is one scalar weight (from-neuron -> to-neuron), indexed layer by
// layer, then by destination, then by source. Circuits mask edges at this
// granularity.
struct EdgeRef {
  int layer;  // weight layer index, 0-based
  int to;     // destination unit within layer output
  int from;   // source unit within layer input
};

// Fully deterministic fixed-point MLP over bit inputs. n <= 12 keeps the
// whole input space enumerable.
class ToyNet {
 public:
  ToyNet(std::vector<int> layer_sizes, std::vector<std::vector<int32_t>> weights,
         std::vector<std::vector<int32_t>> biases, Activation activation, uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_width() const { return sizes_.front(); }
  int label_count() const { return sizes_.back(); }
  int depth() const { return static_cast<int>(sizes_.size()) - 1; }
  Activation activation() const { return activation_; }
  uint64_t seed() const { return seed_; }

  // weights()[l] is out x in row-major, raw Q8.24.
  const std::vector<std::vector<int32_t>>& weights() const { return weights_; }
  const std::vector<std::vector<int32_t>>& biases() const { return biases_; }

  int edge_count() const { return edge_count_; }
  EdgeRef edge_ref(int edge_index) const;
  int32_t edge_weight(int edge_index) const;

  size_t parameter_count() const;  // weights + biases

  struct ForwardResult {
    uint8_t label;
    std::vector<int32_t> logits;  // raw Q8.24
  };
  ForwardResult forward(uint16_t input_bits) const;
  uint8_t label_of(uint16_t input_bits) const { return forward(input_bits).label; }

  // Post-activation values of layer `layer` (1..depth); layer 0 = input bits.
  std::vector<int32_t> layer_activations(uint16_t input_bits, int layer) const;

  // Forward continuing from substituted activations at `layer`.
  ForwardResult forward_from_layer(int layer, const std::vector<int32_t>& activations) const;

  // Masked forward: edges with mask[edge]==false contribute
  // weight * ablation_value(source unit) instead of weight * activation.
  // `unit_ablation` holds one raw value per (layer, unit) for layers 0..depth-1.
  ForwardResult forward_masked(uint16_t input_bits, const std::vector<bool>& edge_mask,
                               const std::vector<std::vector<int32_t>>& unit_ablation) const;

  // Mean post-activation per unit over all enumerated inputs, rounded to the
  // 16-bit parameter grid. Index [layer][unit], layers 0..depth-1.
  std::vector<std::vector<int32_t>> mean_activations() const;

  std::vector<Observation> enumerate_io() const;

  // Scalar multiply-add = 2 FLOPs, bias add = 1 FLOP, comparisons free.
  uint64_t forward_flops() const;
  // Interval multiply-add = 8 FLOPs, interval bias add = 2 FLOPs.
  uint64_t interval_forward_flops() const;

  std::vector<uint8_t> to_blob() const;  // "XTN1" container
  static ToyNet from_blob(const std::vector<uint8_t>& blob);

 private:
  void check_ranges() const;

  std::vector<int> sizes_;
  std::vector<std::vector<int32_t>> weights_;
  std::vector<std::vector<int32_t>> biases_;
  Activation activation_;
  uint64_t seed_;
  int edge_count_;
};

struct TrainResult {
  std::shared_ptr<const ToyNet> net;
  double train_accuracy;  // vs task target on all 2^n inputs
  bool converged;         // reached the 0.95 threshold before the step cap
  int steps;
};

// Full-batch fixed-point gradient descent on squared logit error with +-1
// targets, weights clamped to [-1, 1], final weights rounded to the 16-bit
// parameter grid. Returns the best net with a flag when the 0.95 training
// accuracy threshold was not reached within 10^4 steps.
TrainResult train_toy(const TaskSpec& task, uint64_t seed);

// Uniform with-replacement inputs labeled by the model.
std::vector<Observation> sample_observations(const ToyNet& net, size_t count, Rng& rng);

// size draws, first 80% train / last 20% heldout.
Dataset sample_dataset(const ToyNet& net, const TaskSpec& task, size_t size, uint64_t seed);

// Whole enumerated space as train (heldout empty) -- handy for exact scoring.
Dataset full_enumeration_dataset(const ToyNet& net);

}  // namespace vb
