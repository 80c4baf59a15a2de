#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vb {

// One (input, model output) pair. Inputs are bit-vectors of width n <= 12,
// stored MSB-first: bit j of the vector is bit (n-1-j) of `input`, so
// lexicographic vector order equals numeric order.
struct Observation {
  uint16_t input = 0;
  uint8_t width = 0;
  uint8_t label = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Dataset {
  std::vector<Observation> train;
  std::vector<Observation> heldout;
  uint64_t generator_seed = 0;
  std::string generator_spec;
};

}  // namespace vb
