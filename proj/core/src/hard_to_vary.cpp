#include "virtuebench/hard_to_vary.hpp"

#include <algorithm>

#include "virtuebench/kcomplexity.hpp"
#include "virtuebench/rng.hpp"
#include "virtuebench/virtues.hpp"

namespace vb {

namespace {

uint64_t sat_add(uint64_t a, uint64_t b) {
  unsigned __int128 s = static_cast<unsigned __int128>(a) + b;
  return s > UINT64_MAX ? UINT64_MAX : static_cast<uint64_t>(s);
}

uint64_t sat_mul(uint64_t a, uint64_t b) {
  if (a == 0 || b == 0) return 0;
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  return p > UINT64_MAX ? UINT64_MAX : static_cast<uint64_t>(p);
}

uint64_t width_values(int w) { return w >= 64 ? UINT64_MAX : (uint64_t{1} << w); }

// Alternatives for substituting one field, preserving the field kind.
uint64_t substitution_count(const Field& f, const EditAlphabet& a) {
  if (f.kind == Field::Kind::Symbol) {
    uint64_t n = a.symbols.size();
    for (Sym s : a.symbols) {
      if (s == f.sym) {
        --n;
        break;
      }
    }
    return n;
  }
  return width_values(f.width) - 1;
}

uint64_t insertion_alternatives(const EditAlphabet& a) {
  uint64_t n = a.symbols.size();
  for (int w : a.literal_widths) n = sat_add(n, width_values(w));
  return n;
}

}  // namespace

uint64_t EditCandidates::count() const {
  const SymbolStream& s = *stream;
  uint64_t n = 0;
  for (const Field& f : s) n = sat_add(n, substitution_count(f, alphabet));
  n = sat_add(n, sat_mul(s.size() + 1, insertion_alternatives(alphabet)));
  n = sat_add(n, s.size());                        // deletions
  n = sat_add(n, s.empty() ? 0 : s.size() - 1);    // transpositions
  return n;
}

EditOp EditCandidates::at(uint64_t index) const {
  const SymbolStream& s = *stream;
  // substitutions
  for (size_t p = 0; p < s.size(); ++p) {
    uint64_t subs = substitution_count(s[p], alphabet);
    if (index < subs) {
      if (s[p].kind == Field::Kind::Symbol) {
        for (Sym alt : alphabet.symbols) {
          if (alt == s[p].sym) continue;
          if (index == 0) return EditOp::substitute(p, Field::symbol(alt));
          --index;
        }
      } else {
        uint64_t v = index < s[p].value ? index : index + 1;
        return EditOp::substitute(p, Field::literal(v, s[p].width));
      }
    }
    index -= subs;
  }
  // insertions
  uint64_t ins_alts = insertion_alternatives(alphabet);
  for (size_t p = 0; p <= s.size(); ++p) {
    if (index < ins_alts) {
      if (index < alphabet.symbols.size()) {
        return EditOp::insert(p, Field::symbol(alphabet.symbols[index]));
      }
      uint64_t rest = index - alphabet.symbols.size();
      for (int w : alphabet.literal_widths) {
        uint64_t vals = width_values(w);
        if (rest < vals) return EditOp::insert(p, Field::literal(rest, w));
        rest -= vals;
      }
      throw ValidationError("candidate index out of range");
    }
    index -= ins_alts;
  }
  // deletions
  if (index < s.size()) return EditOp::erase(index);
  index -= s.size();
  // transpositions
  if (!s.empty() && index < s.size() - 1) return EditOp::transpose(index);
  throw ValidationError("candidate index out of range");
}

namespace {

struct NeighborScore {
  double hv;
  bool valid;
};

class HtvEvaluator {
 public:
  HtvEvaluator(const Explanation& e, std::span<const Observation> train,
               const BackgroundTheory& b, const DecodeContext& ctx)
      : train_(train), b_(b), ctx_(ctx), original_stream_(e.to_stream(b)) {}

  const SymbolStream& original_stream() const { return original_stream_; }

  // hv of the explanation the edited stream decodes to; invalid for
  // undecodable streams and for streams identical to the original (the
  // explanation itself is not its own neighbor).
  NeighborScore score(const SymbolStream& edited) {
    if (edited == original_stream_) return {0.0, false};
    ExplanationPtr n;
    try {
      n = decode_stream(edited, b_, ctx_);
    } catch (const DecodeError&) {
      return {0.0, false};
    } catch (const FixedOverflow&) {
      return {0.0, false};
    }
    double acc = n->joint_log2(train_).bits;
    uint64_t k = k_complexity(*n, b_);
    return {acc - static_cast<double>(k), true};
  }

 private:
  std::span<const Observation> train_;
  const BackgroundTheory& b_;
  const DecodeContext& ctx_;
  SymbolStream original_stream_;
};

}  // namespace

HtvResult is_hard_to_vary(const Explanation& e, std::span<const Observation> train,
                          const BackgroundTheory& b, const DecodeContext& ctx,
                          const HtvOptions& opts) {
  if (opts.radius != 1 && opts.radius != 2) throw ValidationError("radius must be 1 or 2");
  if (train.empty()) throw EmptyDatasetError("hard-to-vary test needs training data");

  HtvResult result;
  result.hv_value = hard_to_vary_score(e, train, b);

  HtvEvaluator eval(e, train, b, ctx);
  EditAlphabet alphabet = e.edit_alphabet(b);
  EditCandidates base{&eval.original_stream(), alphabet};
  uint64_t n1 = base.count();

  // Radius-2 pair count upper bound: any single edit changes the length by
  // at most one, so a padded single-edit count bounds the second step.
  uint64_t bound = n1;
  if (opts.radius == 2) {
    SymbolStream padded = eval.original_stream();
    padded.push_back(Field::literal(0, 1));
    EditCandidates padded_c{&padded, alphabet};
    bound = sat_add(n1, sat_mul(n1, padded_c.count()));
  }
  result.neighborhood_size_bound = bound;

  bool have_best = false;
  auto consider = [&](const SymbolStream& edited, std::vector<EditOp> ops) -> bool {
    NeighborScore s = eval.score(edited);
    ++result.candidates_considered;
    if (!s.valid) return false;
    if (!have_best || s.hv > result.best_neighbor_hv) {
      result.best_neighbor_hv = s.hv;
      have_best = true;
    }
    if (s.hv >= result.hv_value) {
      result.witness = std::move(ops);
      result.tie_witness = (s.hv == result.hv_value);
      return true;  // a tie or an improvement already defeats hard-to-varyness
    }
    return false;
  };

  if (bound <= opts.cap) {
    // Exhaustive enumeration.
    for (uint64_t i = 0; i < n1; ++i) {
      EditOp op = base.at(i);
      SymbolStream s1;
      try {
        s1 = apply_ops(eval.original_stream(), std::span<const EditOp>(&op, 1));
      } catch (const DecodeError&) {
        continue;
      }
      if (consider(s1, {op})) {
        result.hard_to_vary = false;
        return result;
      }
      if (opts.radius == 2) {
        EditCandidates second{&s1, alphabet};
        uint64_t n2 = second.count();
        for (uint64_t j = 0; j < n2; ++j) {
          EditOp op2 = second.at(j);
          SymbolStream s2;
          try {
            s2 = apply_ops(s1, std::span<const EditOp>(&op2, 1));
          } catch (const DecodeError&) {
            continue;
          }
          if (consider(s2, {op, op2})) {
            result.hard_to_vary = false;
            return result;
          }
        }
      }
    }
    result.hard_to_vary = true;
    return result;
  }

  if (!opts.allow_sampling) throw NeighborhoodTooLarge(bound, opts.cap);

  // Seeded sampling fallback: the verdict is reported as sampled.
  result.sampled = true;
  for (uint64_t i = 0; i < opts.sample_count; ++i) {
    Rng rng = Rng::substream(opts.seed, i);
    EditOp op = base.at(rng.next_below(std::max<uint64_t>(1, n1)));
    SymbolStream s1;
    try {
      s1 = apply_ops(eval.original_stream(), std::span<const EditOp>(&op, 1));
    } catch (const DecodeError&) {
      continue;
    }
    std::vector<EditOp> ops = {op};
    if (opts.radius == 2 && (rng.next_u64() & 1)) {
      EditCandidates second{&s1, alphabet};
      uint64_t n2 = second.count();
      if (n2 > 0) {
        EditOp op2 = second.at(rng.next_below(n2));
        try {
          s1 = apply_ops(s1, std::span<const EditOp>(&op2, 1));
          ops.push_back(op2);
        } catch (const DecodeError&) {
          continue;
        }
      }
    }
    if (consider(s1, std::move(ops))) {
      result.hard_to_vary = false;
      return result;
    }
  }
  result.hard_to_vary = true;
  return result;
}

}  // namespace vb
