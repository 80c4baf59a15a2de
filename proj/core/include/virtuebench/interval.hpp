#pragma once

#include <cstdint>
#include <vector>

#include "virtuebench/toy_net.hpp"

namespace vb {

// Closed interval of raw Q8.24 values. Propagation mirrors the net's exact
// integer arithmetic: w * a >> 24 is monotone in a for fixed w, so evaluating
// the same floor-shift at the interval endpoints gives sound, in fact exact,
// per-term bounds.
struct Interval {
  int64_t lo = 0;
  int64_t hi = 0;

  static Interval point(int64_t v) { return {v, v}; }
  bool contains(int64_t v) const { return lo <= v && v <= hi; }
  int64_t magnitude() const { return std::max(lo < 0 ? -lo : lo, hi < 0 ? -hi : hi); }
};

Interval interval_mul_weight(Interval a, int32_t w);

// Output logit intervals for all inputs in the given per-bit box
// (each input bit constrained to {0}, {1} or {0,1}).
std::vector<Interval> interval_forward(const ToyNet& net, const std::vector<Interval>& input_box);

// True iff the interval logits force argmax == label under the
// lowest-index tie-break (ties only help labels with smaller index).
bool intervals_force_label(const std::vector<Interval>& logits, int label);

// Per-unit interval bounds of every layer's post-activations over the whole
// input space. Index [layer][unit], layer 0 = input bits.
std::vector<std::vector<Interval>> activation_bounds(const ToyNet& net);

}  // namespace vb
