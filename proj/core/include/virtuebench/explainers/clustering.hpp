#pragma once

#include <memory>
#include <vector>

#include "virtuebench/explanation.hpp"

namespace vb {

enum class ClusterSpace : uint8_t { Input, Layer };

// Partition of the input (or a hidden layer's activation) space into nearest-
// centroid cells; each cell predicts the empirical model-output histogram of
// its enumerated members. Cell histograms are stored as integer counts so the
// predictive distribution reproduces exactly after a serialize round trip.
class ClusteringExplanation final : public Explanation {
 public:
  ClusteringExplanation(std::shared_ptr<const ToyNet> net, ClusterSpace space, int layer_index,
                        int input_width, int label_count,
                        std::vector<std::vector<int32_t>> centroids,
                        std::vector<std::vector<uint32_t>> cell_label_counts,
                        bool tie_rule_enabled = true);

  Family family() const override { return Family::Clustering; }
  int input_width() const override { return n_; }
  int label_count() const override { return label_count_; }
  std::vector<double> predict(uint16_t input_bits) const override;
  SymbolStream to_stream(const BackgroundTheory& b) const override;
  int entity_count() const override { return static_cast<int>(centroids_.size()); }
  bool internal_constraints_ok() const override;
  EditAlphabet edit_alphabet(const BackgroundTheory& b) const override;

  int k() const { return static_cast<int>(centroids_.size()); }
  ClusterSpace space() const { return space_; }
  int layer_index() const { return layer_index_; }
  const std::vector<std::vector<int32_t>>& centroids() const { return centroids_; }
  const std::vector<std::vector<uint32_t>>& cell_label_counts() const { return cell_label_counts_; }
  bool tie_rule_enabled() const { return tie_rule_enabled_; }

  // Nearest centroid by squared distance, ties to the lowest centroid index.
  int assign(const std::vector<int32_t>& point) const;
  std::vector<int32_t> embed(uint16_t input_bits) const;

  // Enumerated members per cell.
  std::vector<std::vector<uint16_t>> cells() const;

  static ExplanationPtr from_source(FieldSource& src, const BackgroundTheory& b,
                                    const DecodeContext& ctx);

 private:
  std::shared_ptr<const ToyNet> net_;  // required only for Layer space
  ClusterSpace space_;
  int layer_index_;
  int n_;
  int label_count_;
  std::vector<std::vector<int32_t>> centroids_;
  std::vector<std::vector<uint32_t>> cell_label_counts_;
  bool tie_rule_enabled_;
  std::vector<std::vector<double>> cell_dist_;  // smoothed per-cell distributions
};

// Deterministic k-means: k-means++ seeding from `seed`, Lloyd iterations to a
// fixed point or 100 rounds, empty cells re-seeded from the farthest point.
// Centroids are rounded to the 16-bit parameter grid before the final cell
// statistics are taken.
std::shared_ptr<const ClusteringExplanation> fit_clustering(std::shared_ptr<const ToyNet> net,
                                                            ClusterSpace space, int layer_index,
                                                            int k, uint64_t seed);

}  // namespace vb
