#include "virtuebench/virtues.hpp"

#include <cmath>

#include <json.hpp>

#include "virtuebench/explainers/mixture.hpp"
#include "virtuebench/hard_to_vary.hpp"
#include "virtuebench/kcomplexity.hpp"
#include "virtuebench/rng.hpp"

namespace vb {

std::string rubric_level_name(RubricLevel l) {
  switch (l) {
    case RubricLevel::High: return "high";
    case RubricLevel::Weak: return "weak";
    case RubricLevel::None: return "none";
  }
  throw ValidationError("unreachable rubric level");
}

double log_likelihood(const Explanation& e, std::span<const Observation> obs) {
  if (obs.empty()) return 0.0;  // log of an empty product
  return e.joint_log2(obs).bits;
}

double accuracy(const Explanation& e, std::span<const Observation> train) {
  if (train.empty()) throw EmptyDatasetError("accuracy needs a non-empty training set");
  return e.joint_log2(train).bits;
}

double descriptiveness(const Explanation& e, std::span<const Observation> train) {
  return e.factorized_log2(train).bits;
}

double co_explanation(const Explanation& e, std::span<const Observation> train) {
  if (train.empty()) return 0.0;
  return e.joint_log2(train).bits - e.factorized_log2(train).bits;
}

double fruitfulness(const Explanation& e, std::span<const Observation> heldout) {
  if (heldout.empty()) return 0.0;
  return e.joint_log2(heldout).bits;
}

PrecisionPower precision_power(const Explanation& e, const SamplerConfig& cfg,
                               const ToyNet& net) {
  if (cfg.num_datasets < 1 || cfg.dataset_size < 1) {
    throw ValidationError("sampler config must draw at least one dataset of one point");
  }
  // Per-sample-index substreams: estimates do not depend on scheduling or
  // worker count, and precision/power share the exact same datasets.
  std::vector<double> joint(cfg.num_datasets), fact(cfg.num_datasets);
  for (int j = 0; j < cfg.num_datasets; ++j) {
    Rng rng = Rng::substream(cfg.seed, static_cast<uint64_t>(j));
    auto obs = sample_observations(net, static_cast<size_t>(cfg.dataset_size), rng);
    joint[j] = e.joint_log2(obs).bits;
    fact[j] = e.factorized_log2(obs).bits;
  }
  auto mean_stderr = [&](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
    return Estimate{mean, std::sqrt(var / static_cast<double>(v.size()))};
  };
  PrecisionPower out;
  out.precision = mean_stderr(joint);
  out.power = mean_stderr(fact);
  std::vector<double> diff(joint.size());
  for (size_t j = 0; j < joint.size(); ++j) diff[j] = joint[j] - fact[j];
  Estimate u = mean_stderr(diff);
  // Defined as the difference so the identity holds exactly per run.
  out.unification = Estimate{out.precision.value - out.power.value, u.stderr_};
  return out;
}

double prior_log2(const Explanation& e, const BackgroundTheory& b) {
  return -static_cast<double>(conciseness(e, b));
}

bool consistency_check(const Explanation& e) {
  uint32_t total = uint32_t{1} << e.input_width();
  for (uint32_t x = 0; x < total; ++x) {
    auto p = e.predict(static_cast<uint16_t>(x));
    if (p.size() != static_cast<size_t>(e.label_count())) return false;
    double sum = 0.0;
    for (double v : p) {
      if (v < 0.0 || !std::isfinite(v)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) return false;
  }
  return e.internal_constraints_ok();
}

int parsimony(const Explanation& e) { return e.entity_count(); }

uint64_t conciseness(const Explanation& e, const BackgroundTheory& b) {
  return stream_bit_length(e.to_stream(b), b);
}

uint64_t k_complexity(const Explanation& e, const BackgroundTheory& b) {
  SerializedExplanation s = serialize(e, b);
  return k_complexity_bits_for(s.bytes, s.bit_length);
}

double hard_to_vary_score(const Explanation& e, std::span<const Observation> train,
                          const BackgroundTheory& b) {
  return accuracy(e, train) - static_cast<double>(k_complexity(e, b));
}

double adhocness(double h_bits_alone, double h_bits_given_e) {
  if (h_bits_alone < 0.0 || h_bits_given_e < 0.0) {
    throw ValidationError("code lengths must be non-negative");
  }
  return std::exp2(-h_bits_alone) - std::exp2(-h_bits_given_e);
}

double hypothesis_bits(const Explanation& hypothesis, const BackgroundTheory& b) {
  return static_cast<double>(conciseness(hypothesis, b));
}

double hypothesis_bits_given(const Explanation& hypothesis, const Explanation& e,
                             const BackgroundTheory& b) {
  BackgroundTheory conditioned = b.extended_with_counts(symbol_counts(e.to_stream(b)));
  return static_cast<double>(conciseness(hypothesis, conditioned));
}

// ---- scorecard -------------------------------------------------------------

namespace {

// The scorecard's built-in adhocness probe: a minimal single-hypothesis
// fragment. Explanations whose vocabulary covers it come out non-adhoc,
// foreign vocabularies come out adhoc.
ExplanationPtr adhocness_probe(int input_width, int label_count) {
  std::vector<Hypothesis> h = {{HypothesisKind::Const0, 1}};
  return std::make_shared<MixtureExplanation>(input_width, std::max(2, label_count), h, 0);
}

}  // namespace

VirtueScorecard compute_scorecard(const Explanation& e, const Dataset& data,
                                  const BackgroundTheory& b, const ToyNet& net,
                                  const ScorecardOptions& opts) {
  VirtueScorecard card;
  LogLik joint = e.joint_log2(data.train);
  LogLik fact = e.factorized_log2(data.train);
  card.accuracy_log2 = joint.bits;
  if (joint.bits > -1020.0) card.accuracy_prob = std::exp2(joint.bits);
  card.descriptiveness = fact.bits;
  card.co_explanation = joint.bits - fact.bits;
  card.likelihood_clamped = joint.clamped || fact.clamped;

  PrecisionPower pp = precision_power(e, opts.sampler, net);
  card.precision_est = pp.precision;
  card.power_est = pp.power;
  card.unification_est = pp.unification;

  card.prior_log2 = prior_log2(e, b);
  card.fruitfulness_log2 = fruitfulness(e, data.heldout);
  card.fruitfulness_warning = data.heldout.empty();
  card.consistency = consistency_check(e);
  card.parsimony = parsimony(e);
  card.conciseness_bits = conciseness(e, b);
  card.k_complexity_bits = k_complexity(e, b);
  card.hv_value = card.accuracy_log2 - static_cast<double>(card.k_complexity_bits);

  HtvOptions hopts;
  hopts.radius = opts.htv_radius;
  hopts.cap = opts.htv_cap;
  hopts.sample_count = opts.htv_samples;
  hopts.seed = opts.htv_seed;
  hopts.allow_sampling = true;
  DecodeContext ctx{std::make_shared<const ToyNet>(net)};
  HtvResult htv = is_hard_to_vary(e, data.train, b, ctx, hopts);
  card.hard_to_vary = htv.hard_to_vary;
  card.hard_to_vary_sampled = htv.sampled;

  auto probe = adhocness_probe(e.input_width(), e.label_count());
  card.adhocness = adhocness(hypothesis_bits(*probe, b), hypothesis_bits_given(*probe, e, b));
  card.nomological_flag = e.nomological();
  return card;
}

std::string VirtueScorecard::to_json() const {
  nlohmann::json j;
  j["accuracy_log2"] = accuracy_log2;
  if (accuracy_prob) j["accuracy_prob"] = *accuracy_prob;
  j["descriptiveness"] = descriptiveness;
  j["co_explanation"] = co_explanation;
  j["precision_est"] = precision_est.value;
  j["precision_stderr"] = precision_est.stderr_;
  j["power_est"] = power_est.value;
  j["power_stderr"] = power_est.stderr_;
  j["unification_est"] = unification_est.value;
  j["unification_stderr"] = unification_est.stderr_;
  j["prior_log2"] = prior_log2;
  j["fruitfulness_log2"] = fruitfulness_log2;
  j["fruitfulness_warning"] = fruitfulness_warning;
  j["consistency"] = consistency;
  j["parsimony"] = parsimony;
  j["conciseness_bits"] = conciseness_bits;
  j["k_complexity_bits"] = k_complexity_bits;
  j["hv_value"] = hv_value;
  j["hard_to_vary"] = hard_to_vary;
  j["hard_to_vary_sampled"] = hard_to_vary_sampled;
  j["adhocness"] = adhocness;
  j["nomological_flag"] = nomological_flag;
  j["likelihood_clamped"] = likelihood_clamped;
  if (!rubric_levels.empty()) {
    nlohmann::json levels;
    for (const auto& [virtue, level] : rubric_levels) levels[virtue] = rubric_level_name(level);
    j["rubric_levels"] = levels;
  }
  return j.dump(2);
}

}  // namespace vb
