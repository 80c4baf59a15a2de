#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "virtuebench/proofs.hpp"
#include "virtuebench/virtues.hpp"

namespace vb {

// Per-virtue rubric cutoffs. For higher-is-better virtues a raw value of at
// least `high` scores High, at least `weak` scores Weak; for lower-is-better
// virtues the comparisons flip. Boolean virtues ignore the cutoffs.
struct RubricThreshold {
  double high = 0.0;
  double weak = 0.0;
};

struct RunConfig {
  std::string task = "majority8";
  uint64_t train_seed = 42;
  uint64_t data_seed = 7;
  size_t dataset_size = 320;
  std::vector<int> clustering_k = {1, 2, 4, 16};
  uint64_t clustering_seed = 7;
  struct DictionaryGridEntry {
    int atoms;
    int max_l0;
  };
  std::vector<DictionaryGridEntry> dictionary_grid = {{6, 2}, {8, 3}};
  int dictionary_layer = 1;
  uint64_t dictionary_seed = 5;
  std::vector<double> circuit_tau = {0.05, 0.2};
  std::vector<std::string> families = {"clustering", "dictionary", "circuit", "mixture",
                                       "straightforward"};
  SamplerConfig sampler{64, 32, 11};
  ScorecardOptions scorecard;
  std::map<std::string, RubricThreshold> rubric_thresholds;
  std::string output_dir = "out";

  static RunConfig defaults();
  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  void validate() const;
};

struct TableCell {
  RubricLevel level;
  double raw;
};

struct ComparisonTable {
  std::vector<std::string> virtues;          // rows
  std::vector<std::string> explanation_ids;  // columns
  std::vector<std::vector<TableCell>> cells; // [row][col]
};

// The implemented virtue rows, in table order.
const std::vector<std::string>& virtue_names();
std::map<std::string, RubricThreshold> default_rubric_thresholds();

// Threshold mapping of one scorecard. Throws MissingThreshold when a numeric
// virtue has no entry. Likelihood virtues are normalized per observation
// before comparison.
std::map<std::string, RubricLevel> map_rubric(const VirtueScorecard& raw,
                                              const std::map<std::string, RubricThreshold>& t,
                                              size_t train_size, size_t heldout_size,
                                              const SamplerConfig& sampler);

std::string render_table_text(const ComparisonTable& t);
std::string render_table_csv(const ComparisonTable& t);
ComparisonTable parse_table_csv(const std::string& csv);

struct RunOutcome {
  ComparisonTable table;
  std::vector<ProofCertificate> certificates;
  std::vector<ParetoPoint> frontier;
  std::string output_dir;
};

// The whole pipeline: train -> fit every explainer in the grid -> score ->
// prove -> render. Writes scorecards, explanation blobs, the table, the
// certificate list, the frontier (JSON + SVG) and a manifest under
// config.output_dir. Deterministic given the config; wall-clock timestamps
// appear only in the manifest.
RunOutcome run(const RunConfig& config);

// Worker cap: VB_WORKERS environment variable, clamped to [1, hardware].
int worker_count();

}  // namespace vb
