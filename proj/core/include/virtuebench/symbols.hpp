#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace vb {

// Closed alphabet of grammar symbols shared by all explanation families.
// Quantized parameters are not symbols; they are fixed-width literals whose
// width comes from BackgroundTheory::quantization_bits (or a family field).
enum class Sym : uint16_t {
  FamClustering,
  FamDictionary,
  FamCircuit,
  FamMixture,
  FamStraightforward,
  SpaceInput,
  SpaceLayer,
  ActRelu,
  ActIdentity,
  AblZero,
  AblMean,
  EdgeOn,
  EdgeOff,
  HypMajority,
  HypParity,
  HypConst0,
  HypConst1,
  HypModAdd,
  Count_,
};

inline constexpr size_t kSymCount = static_cast<size_t>(Sym::Count_);

inline constexpr std::array<std::string_view, kSymCount> kSymNames = {
    "fam.clustering", "fam.dictionary", "fam.circuit",  "fam.mixture", "fam.straightforward",
    "space.input",    "space.layer",    "act.relu",     "act.identity",
    "abl.zero",       "abl.mean",       "edge.on",      "edge.off",
    "hyp.majority",   "hyp.parity",     "hyp.const0",   "hyp.const1",  "hyp.modadd",
};

inline std::string_view sym_name(Sym s) { return kSymNames[static_cast<size_t>(s)]; }

}  // namespace vb
