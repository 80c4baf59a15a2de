#include "virtuebench/explainers/mixture.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace vb {

uint8_t hypothesis_label(HypothesisKind h, uint16_t input, int width, int label_count) {
  switch (h) {
    case HypothesisKind::Majority:
      return 2 * std::popcount(static_cast<unsigned>(input)) > width ? 1 : 0;
    case HypothesisKind::Parity:
      return static_cast<uint8_t>(std::popcount(static_cast<unsigned>(input)) & 1);
    case HypothesisKind::Const0:
      return 0;
    case HypothesisKind::Const1:
      return static_cast<uint8_t>(1 % label_count);
    case HypothesisKind::ModAdd: {
      int half = width / 2;
      int hi = input >> half;
      int lo = input & ((1 << half) - 1);
      return static_cast<uint8_t>((hi + lo) % label_count);
    }
  }
  throw ValidationError("unreachable hypothesis");
}

namespace {

Sym hyp_sym(HypothesisKind k) {
  switch (k) {
    case HypothesisKind::Majority: return Sym::HypMajority;
    case HypothesisKind::Parity: return Sym::HypParity;
    case HypothesisKind::Const0: return Sym::HypConst0;
    case HypothesisKind::Const1: return Sym::HypConst1;
    case HypothesisKind::ModAdd: return Sym::HypModAdd;
  }
  throw ValidationError("unreachable hypothesis");
}

HypothesisKind hyp_kind(Sym s) {
  switch (s) {
    case Sym::HypMajority: return HypothesisKind::Majority;
    case Sym::HypParity: return HypothesisKind::Parity;
    case Sym::HypConst0: return HypothesisKind::Const0;
    case Sym::HypConst1: return HypothesisKind::Const1;
    case Sym::HypModAdd: return HypothesisKind::ModAdd;
    default: throw DecodeError("expected a hypothesis symbol");
  }
}

}  // namespace

MixtureExplanation::MixtureExplanation(int input_width, int label_count,
                                       std::vector<Hypothesis> hypotheses, uint32_t eta_q17)
    : n_(input_width), label_count_(label_count), hypotheses_(std::move(hypotheses)),
      eta_q17_(eta_q17) {
  if (n_ < 1 || n_ > 12) throw ValidationError("input width out of range");
  if (label_count_ < 2) throw ValidationError("mixture needs at least two labels");
  if (hypotheses_.empty()) throw ValidationError("mixture needs at least one hypothesis");
  if (eta_q17_ >= (uint32_t{1} << 16)) throw ValidationError("eta weight out of range");
  weight_sum_ = 0;
  for (const Hypothesis& h : hypotheses_) weight_sum_ += h.prior_weight;
  if (weight_sum_ == 0) throw ValidationError("hypothesis priors sum to zero");
}

double MixtureExplanation::eta() const {
  return static_cast<double>(eta_q17_) / static_cast<double>(uint32_t{1} << 17);
}

double MixtureExplanation::prior(size_t i) const {
  return static_cast<double>(hypotheses_[i].prior_weight) / static_cast<double>(weight_sum_);
}

double MixtureExplanation::label_prob(size_t i, uint16_t input, uint8_t label) const {
  uint8_t predicted = hypothesis_label(hypotheses_[i].kind, input, n_, label_count_);
  double e = eta();
  return label == predicted ? 1.0 - e : e / (label_count_ - 1);
}

std::vector<double> MixtureExplanation::predict(uint16_t input_bits) const {
  std::vector<double> p(label_count_, 0.0);
  for (size_t i = 0; i < hypotheses_.size(); ++i) {
    double w = prior(i);
    if (w == 0.0) continue;
    uint8_t predicted = hypothesis_label(hypotheses_[i].kind, input_bits, n_, label_count_);
    double e = eta();
    for (int y = 0; y < label_count_; ++y) {
      p[y] += w * (y == predicted ? 1.0 - e : e / (label_count_ - 1));
    }
  }
  return p;
}

LogLik MixtureExplanation::joint_log2(std::span<const Observation> obs) const {
  check_width(obs);
  if (obs.empty()) return {};
  // Marginal over the hypothesis, computed per hypothesis in log space.
  // A hypothesis that contradicts any observation at eta = 0 drops out.
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(hypotheses_.size());
  for (size_t i = 0; i < hypotheses_.size(); ++i) {
    double w = prior(i);
    if (w == 0.0) {
      logs.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    double bits = std::log2(w);
    bool dead = false;
    for (const Observation& o : obs) {
      double p = label_prob(i, o.input, o.label);
      if (p == 0.0) {
        dead = true;
        break;
      }
      bits += std::log2(p);
    }
    double v = dead ? -std::numeric_limits<double>::infinity() : bits;
    logs.push_back(v);
    best = std::max(best, v);
  }
  if (!std::isfinite(best)) {
    // Zero likelihood: clamp to the smoothing floor, flagged.
    return {-20.0 * static_cast<double>(obs.size()), true};
  }
  double sum = 0.0;
  for (double v : logs) {
    if (std::isfinite(v)) sum += std::exp2(v - best);
  }
  return {best + std::log2(sum), false};
}

SymbolStream MixtureExplanation::to_stream(const BackgroundTheory& /*b*/) const {
  SymbolStream s;
  s.push_back(Field::symbol(Sym::FamMixture));
  s.push_back(Field::literal(static_cast<uint64_t>(n_), 4));
  s.push_back(Field::literal(static_cast<uint64_t>(label_count_), 4));
  s.push_back(Field::literal(hypotheses_.size(), 4));
  for (const Hypothesis& h : hypotheses_) {
    s.push_back(Field::symbol(hyp_sym(h.kind)));
    s.push_back(Field::literal(h.prior_weight, 16));
  }
  s.push_back(Field::literal(eta_q17_, 16));
  return s;
}

bool MixtureExplanation::internal_constraints_ok() const {
  double total = 0.0;
  for (size_t i = 0; i < hypotheses_.size(); ++i) total += prior(i);
  return std::abs(total - 1.0) < 1e-9 && eta() < 0.5;
}

EditAlphabet MixtureExplanation::edit_alphabet(const BackgroundTheory& /*b*/) const {
  return {{Sym::HypMajority, Sym::HypParity, Sym::HypConst0, Sym::HypConst1, Sym::HypModAdd},
          {4, 16}};
}

ExplanationPtr MixtureExplanation::from_source(FieldSource& src, const BackgroundTheory& /*b*/,
                                               const DecodeContext& /*ctx*/) {
  int n = static_cast<int>(src.next_literal(4));
  int labels = static_cast<int>(src.next_literal(4));
  int count = static_cast<int>(src.next_literal(4));
  if (n < 1 || n > 12 || labels < 2 || count < 1) throw DecodeError("bad mixture header");
  std::vector<Hypothesis> hyps;
  hyps.reserve(count);
  for (int i = 0; i < count; ++i) {
    HypothesisKind kind = hyp_kind(src.next_symbol());
    uint32_t w = static_cast<uint32_t>(src.next_literal(16));
    hyps.push_back({kind, w});
  }
  uint32_t eta = static_cast<uint32_t>(src.next_literal(16));
  try {
    return std::make_shared<MixtureExplanation>(n, labels, std::move(hyps), eta);
  } catch (const std::exception& e) {
    throw DecodeError(std::string("invalid mixture: ") + e.what());
  }
}

}  // namespace vb
