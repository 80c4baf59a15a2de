#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "virtuebench/explanation.hpp"

namespace vb {

struct SamplerConfig {
  int num_datasets = 64;
  int dataset_size = 32;
  uint64_t seed = 0;
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

enum class RubricLevel : uint8_t { High, Weak, None };
std::string rubric_level_name(RubricLevel l);

struct VirtueScorecard {
  double accuracy_log2 = 0.0;
  std::optional<double> accuracy_prob;  // present when accuracy_log2 > -1020
  double descriptiveness = 0.0;
  double co_explanation = 0.0;
  Estimate precision_est;
  Estimate power_est;
  Estimate unification_est;
  double prior_log2 = 0.0;
  double fruitfulness_log2 = 0.0;
  bool fruitfulness_warning = false;  // held-out split was empty
  bool consistency = false;
  int parsimony = 0;
  uint64_t conciseness_bits = 0;
  uint64_t k_complexity_bits = 0;
  double hv_value = 0.0;
  bool hard_to_vary = false;
  bool hard_to_vary_sampled = false;  // verdict from a sampled neighborhood
  double adhocness = 0.0;
  bool nomological_flag = false;
  bool likelihood_clamped = false;
  std::map<std::string, RubricLevel> rubric_levels;

  std::string to_json() const;
};

// ---- individual virtue operations ----------------------------------------

// log2 P(obs | e); empty obs -> 0. Joint semantics (family-defined).
double log_likelihood(const Explanation& e, std::span<const Observation> obs);

double accuracy(const Explanation& e, std::span<const Observation> train);
double descriptiveness(const Explanation& e, std::span<const Observation> train);
double co_explanation(const Explanation& e, std::span<const Observation> train);
double fruitfulness(const Explanation& e, std::span<const Observation> heldout);

// Paired Monte Carlo estimates over shared sampled datasets, so that
// precision == power + unification holds exactly per run.
struct PrecisionPower {
  Estimate precision;
  Estimate power;
  Estimate unification;
};
PrecisionPower precision_power(const Explanation& e, const SamplerConfig& cfg, const ToyNet& net);

double prior_log2(const Explanation& e, const BackgroundTheory& b);
bool consistency_check(const Explanation& e);
int parsimony(const Explanation& e);
uint64_t conciseness(const Explanation& e, const BackgroundTheory& b);
uint64_t k_complexity(const Explanation& e, const BackgroundTheory& b);
double hard_to_vary_score(const Explanation& e, std::span<const Observation> train,
                          const BackgroundTheory& b);

// Adhoc = P(H) - P(H | E, B) with P realized as 2^-bits.
double adhocness(double h_bits_alone, double h_bits_given_e);

// Description length of `hypothesis` under b, and under b conditioned on
// `e` (b extended with e's symbol statistics).
double hypothesis_bits(const Explanation& hypothesis, const BackgroundTheory& b);
double hypothesis_bits_given(const Explanation& hypothesis, const Explanation& e,
                             const BackgroundTheory& b);

struct ScorecardOptions {
  SamplerConfig sampler;
  int htv_radius = 1;
  uint64_t htv_cap = 1000000;       // neighborhood size cap before sampling
  uint64_t htv_samples = 4096;      // sampled-verdict draw count
  uint64_t htv_seed = 23;
};

VirtueScorecard compute_scorecard(const Explanation& e, const Dataset& data,
                                  const BackgroundTheory& b, const ToyNet& net,
                                  const ScorecardOptions& opts);

}  // namespace vb
