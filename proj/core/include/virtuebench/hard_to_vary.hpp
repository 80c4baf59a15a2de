#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "virtuebench/explanation.hpp"

namespace vb {

struct HtvOptions {
  int radius = 1;               // 1 or 2
  uint64_t cap = 1000000;       // max candidates for exhaustive enumeration
  bool allow_sampling = true;   // fall back to seeded sampling past the cap
  uint64_t sample_count = 4096;
  uint64_t seed = 23;
};

struct HtvResult {
  bool hard_to_vary = false;
  // Present when hard_to_vary is false: an edit list whose result has
  // hv >= hv(e). `tie_witness` marks the equal-hv case (a zero-cost
  // variation counts against the explanation).
  std::optional<std::vector<EditOp>> witness;
  bool tie_witness = false;
  bool sampled = false;
  uint64_t candidates_considered = 0;
  uint64_t neighborhood_size_bound = 0;
  double hv_value = 0.0;
  double best_neighbor_hv = 0.0;
};

// Strict local-maximum test of hv(E) = log2 Acc(E) - k(E) over the edit
// neighborhood of the family's symbol alphabet. A neighbor that merely ties
// already defeats hard-to-varyness. Raises NeighborhoodTooLarge past the cap
// when sampling is disabled.
HtvResult is_hard_to_vary(const Explanation& e, std::span<const Observation> train,
                          const BackgroundTheory& b, const DecodeContext& ctx,
                          const HtvOptions& opts);

// Enumerable candidate single edits of a stream under an alphabet. Exposed
// so tests can re-enumerate neighborhoods independently.
struct EditCandidates {
  const SymbolStream* stream;
  EditAlphabet alphabet;

  uint64_t count() const;
  EditOp at(uint64_t index) const;
};

}  // namespace vb
