#include "virtuebench/explainers/circuit.hpp"

#include <algorithm>
#include <map>

#include "virtuebench/rng.hpp"

namespace vb {

CircuitExplanation::CircuitExplanation(std::shared_ptr<const ToyNet> net,
                                       std::vector<bool> edge_mask, AblationValue ablation,
                                       std::vector<std::vector<int32_t>> unit_ablation_values)
    : net_(std::move(net)),
      mask_(std::move(edge_mask)),
      ablation_(ablation),
      ablation_values_(std::move(unit_ablation_values)) {
  if (!net_) throw ValidationError("circuit explanation needs a net");
}

std::shared_ptr<const CircuitExplanation> CircuitExplanation::make(
    std::shared_ptr<const ToyNet> net, std::vector<bool> edge_mask, AblationValue ablation) {
  std::vector<std::vector<int32_t>> values;
  if (ablation == AblationValue::MeanOverInputs) {
    values = net->mean_activations();
  } else {
    values.resize(net->depth());
    for (int l = 0; l < net->depth(); ++l) values[l].assign(net->layer_sizes()[l], 0);
  }
  return std::make_shared<const CircuitExplanation>(std::move(net), std::move(edge_mask), ablation,
                                                    std::move(values));
}

uint8_t CircuitExplanation::masked_label(uint16_t input_bits) const {
  return net_->forward_masked(input_bits, mask_, ablation_values_).label;
}

std::vector<double> CircuitExplanation::predict(uint16_t input_bits) const {
  int labels = label_count();
  std::vector<double> p(labels, labels > 1 ? kSmoothingEps / (labels - 1) : 0.0);
  p[masked_label(input_bits)] = labels > 1 ? 1.0 - kSmoothingEps : 1.0;
  return p;
}

int CircuitExplanation::active_edge_count() const {
  return static_cast<int>(std::count(mask_.begin(), mask_.end(), true));
}

int CircuitExplanation::entity_count() const {
  // Units incident to an active edge, across all layers.
  std::vector<std::vector<bool>> touched(net_->depth() + 1);
  for (int l = 0; l <= net_->depth(); ++l) touched[l].assign(net_->layer_sizes()[l], false);
  for (int e = 0; e < net_->edge_count(); ++e) {
    if (!mask_[e]) continue;
    EdgeRef r = net_->edge_ref(e);
    touched[r.layer][r.from] = true;
    touched[r.layer + 1][r.to] = true;
  }
  int count = 0;
  for (const auto& layer : touched) {
    count += static_cast<int>(std::count(layer.begin(), layer.end(), true));
  }
  return count;
}

bool CircuitExplanation::internal_constraints_ok() const {
  if (mask_.size() != static_cast<size_t>(net_->edge_count())) return false;
  if (ablation_values_.size() != static_cast<size_t>(net_->depth())) return false;
  for (int l = 0; l < net_->depth(); ++l) {
    if (ablation_values_[l].size() != static_cast<size_t>(net_->layer_sizes()[l])) return false;
  }
  return true;
}

SymbolStream CircuitExplanation::to_stream(const BackgroundTheory& b) const {
  int qb = b.quantization_bits();
  SymbolStream s;
  s.push_back(Field::symbol(Sym::FamCircuit));
  s.push_back(Field::symbol(ablation_ == AblationValue::Zero ? Sym::AblZero : Sym::AblMean));
  s.push_back(Field::literal(mask_.size(), 16));
  for (bool on : mask_) s.push_back(Field::symbol(on ? Sym::EdgeOn : Sym::EdgeOff));
  if (ablation_ == AblationValue::MeanOverInputs) {
    for (const auto& layer : ablation_values_) {
      for (int32_t v : layer) {
        s.push_back(Field::literal(encode_quantized(quantize_raw(v, qb), qb), qb));
      }
    }
  }
  return s;
}

EditAlphabet CircuitExplanation::edit_alphabet(const BackgroundTheory& b) const {
  return {{Sym::EdgeOn, Sym::EdgeOff, Sym::AblZero, Sym::AblMean},
          {16, b.quantization_bits()}};
}

ExplanationPtr CircuitExplanation::from_source(FieldSource& src, const BackgroundTheory& b,
                                               const DecodeContext& ctx) {
  if (!ctx.net) throw DecodeError("circuit explanation needs a decode net");
  int qb = b.quantization_bits();
  Sym abl = src.next_symbol();
  if (abl != Sym::AblZero && abl != Sym::AblMean) throw DecodeError("bad ablation symbol");
  uint64_t count = src.next_literal(16);
  if (count != static_cast<uint64_t>(ctx.net->edge_count())) {
    throw DecodeError("edge count does not match the subject net");
  }
  std::vector<bool> mask(count);
  for (uint64_t e = 0; e < count; ++e) {
    Sym s = src.next_symbol();
    if (s == Sym::EdgeOn) {
      mask[e] = true;
    } else if (s == Sym::EdgeOff) {
      mask[e] = false;
    } else {
      throw DecodeError("bad edge symbol");
    }
  }
  std::vector<std::vector<int32_t>> values(ctx.net->depth());
  for (int l = 0; l < ctx.net->depth(); ++l) {
    values[l].assign(ctx.net->layer_sizes()[l], 0);
    if (abl == Sym::AblMean) {
      for (auto& v : values[l]) v = decode_quantized(src.next_literal(qb), qb);
    }
  }
  return std::make_shared<CircuitExplanation>(
      ctx.net, std::move(mask), abl == Sym::AblZero ? AblationValue::Zero : AblationValue::MeanOverInputs,
      std::move(values));
}

// ---- FCM -------------------------------------------------------------------

namespace {

// Agreement of the net with the given active-edge mask against the full net.
class AgreementOracle {
 public:
  AgreementOracle(const ToyNet& net, const std::vector<std::vector<int32_t>>& ablation)
      : net_(net), ablation_(ablation) {
    uint32_t total = uint32_t{1} << net.input_width();
    full_labels_.resize(total);
    for (uint32_t x = 0; x < total; ++x) full_labels_[x] = net.label_of(static_cast<uint16_t>(x));
  }

  double agreement(const std::vector<bool>& active) {
    auto it = memo_.find(active);
    if (it != memo_.end()) return it->second;
    uint32_t total = static_cast<uint32_t>(full_labels_.size());
    uint32_t hits = 0;
    for (uint32_t x = 0; x < total; ++x) {
      if (net_.forward_masked(static_cast<uint16_t>(x), active, ablation_).label ==
          full_labels_[x]) {
        ++hits;
      }
    }
    double f = static_cast<double>(hits) / static_cast<double>(total);
    memo_.emplace(active, f);
    return f;
  }

 private:
  const ToyNet& net_;
  const std::vector<std::vector<int32_t>>& ablation_;
  std::vector<uint8_t> full_labels_;
  std::map<std::vector<bool>, double> memo_;
};

std::vector<bool> minus_edges(const std::vector<bool>& base, const std::vector<int>& edges,
                              uint64_t subset_bits) {
  std::vector<bool> m = base;
  for (size_t i = 0; i < edges.size(); ++i) {
    if ((subset_bits >> i) & 1) m[edges[i]] = false;
  }
  return m;
}

std::vector<bool> random_subset_mask(const std::vector<bool>& base, const std::vector<int>& edges,
                                     Rng& rng, std::vector<bool>* chosen) {
  std::vector<bool> m = base;
  chosen->assign(edges.size(), false);
  for (size_t i = 0; i < edges.size(); ++i) {
    if (rng.next_u64() & 1) {
      m[edges[i]] = false;
      (*chosen)[i] = true;
    }
  }
  return m;
}

}  // namespace

FcmScores fcm_scores(const CircuitExplanation& circuit, int subset_budget, uint64_t seed) {
  if (subset_budget < 1) throw ValidationError("subset_budget must be >= 1");
  const ToyNet& net = *circuit.net();
  AgreementOracle oracle(net, circuit.unit_ablation_values());

  std::vector<int> active;
  for (int e = 0; e < net.edge_count(); ++e) {
    if (circuit.edge_mask()[e]) active.push_back(e);
  }
  std::vector<bool> full(net.edge_count(), true);
  const std::vector<bool>& cmask = circuit.edge_mask();

  FcmScores out;
  out.faithfulness = oracle.agreement(cmask);
  out.exhaustive = active.size() <= 12;

  // Incompleteness: max over proper subsets K of C of |F(C\K) - F(M\K)|.
  out.incompleteness_max = 0.0;
  if (out.exhaustive) {
    uint64_t subsets = uint64_t{1} << active.size();
    for (uint64_t k = 0; k + 1 < subsets || (k == 0 && subsets == 1); ++k) {
      double fc = oracle.agreement(minus_edges(cmask, active, k));
      double fm = oracle.agreement(minus_edges(full, active, k));
      out.incompleteness_max = std::max(out.incompleteness_max, std::abs(fc - fm));
      if (subsets == 1) break;
    }
  } else {
    Rng rng(Rng::mix(seed, 0xfc1));
    std::vector<bool> chosen;
    for (int s = 0; s < subset_budget; ++s) {
      std::vector<bool> ck = random_subset_mask(cmask, active, rng, &chosen);
      std::vector<bool> mk = full;
      for (size_t i = 0; i < active.size(); ++i) {
        if (chosen[i]) mk[active[i]] = false;
      }
      if (std::count(chosen.begin(), chosen.end(), true) ==
          static_cast<ptrdiff_t>(active.size()) && !active.empty()) {
        continue;  // K = C is not a proper subset
      }
      out.incompleteness_max =
          std::max(out.incompleteness_max, std::abs(oracle.agreement(ck) - oracle.agreement(mk)));
    }
  }

  // Minimality per active edge v: max over K subseteq C\{v} of
  // |F(C\(K u {v})) - F(C\K)|.
  for (size_t vi = 0; vi < active.size(); ++vi) {
    int v = active[vi];
    std::vector<int> rest;
    for (size_t i = 0; i < active.size(); ++i) {
      if (i != vi) rest.push_back(active[i]);
    }
    double best = 0.0;
    if (out.exhaustive) {
      uint64_t subsets = uint64_t{1} << rest.size();
      for (uint64_t k = 0; k < subsets; ++k) {
        std::vector<bool> ck = minus_edges(cmask, rest, k);
        std::vector<bool> ckv = ck;
        ckv[v] = false;
        best = std::max(best, std::abs(oracle.agreement(ckv) - oracle.agreement(ck)));
      }
    } else {
      Rng rng(Rng::mix(seed, 0x3000 + vi));
      std::vector<bool> chosen;
      for (int s = 0; s < subset_budget; ++s) {
        std::vector<bool> ck = random_subset_mask(cmask, rest, rng, &chosen);
        std::vector<bool> ckv = ck;
        ckv[v] = false;
        best = std::max(best, std::abs(oracle.agreement(ckv) - oracle.agreement(ck)));
      }
    }
    out.minimality.push_back(best);
    out.minimality_edges.push_back(v);
  }
  return out;
}

std::shared_ptr<const CircuitExplanation> discover_circuit(std::shared_ptr<const ToyNet> net,
                                                           double tau, AblationValue ablation) {
  if (tau < 0.0 || tau > 1.0) throw ValidationError("tau must be in [0, 1]");
  auto circuit = CircuitExplanation::make(net, std::vector<bool>(net->edge_count(), true),
                                          ablation);
  AgreementOracle oracle(*net, circuit->unit_ablation_values());
  std::vector<bool> mask(net->edge_count(), true);
  double floor = 1.0 - tau;

  while (true) {
    int best_edge = -1;
    double best_f = -1.0;
    for (int e = 0; e < net->edge_count(); ++e) {
      if (!mask[e]) continue;
      std::vector<bool> candidate = mask;
      candidate[e] = false;
      double f = oracle.agreement(candidate);
      if (f > best_f) {  // ties keep the lowest edge index
        best_f = f;
        best_edge = e;
      }
    }
    if (best_edge < 0 || best_f < floor) break;
    mask[best_edge] = false;
  }
  return std::make_shared<const CircuitExplanation>(net, std::move(mask), ablation,
                                                    circuit->unit_ablation_values());
}

}  // namespace vb
