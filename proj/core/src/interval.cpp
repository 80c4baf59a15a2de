#include "virtuebench/interval.hpp"

#include <algorithm>

#include "virtuebench/errors.hpp"
#include "virtuebench/fixed_point.hpp"

namespace vb {

Interval interval_mul_weight(Interval a, int32_t w) {
  // floor((w * a) >> 24) is monotone in a for fixed w, so the exact image of
  // the interval is obtained at its endpoints.
  int64_t x = fx_mul_raw(w, a.lo);
  int64_t y = fx_mul_raw(w, a.hi);
  return {std::min(x, y), std::max(x, y)};
}

namespace {

std::vector<Interval> propagate(const ToyNet& net, std::vector<Interval> act) {
  const auto& sizes = net.layer_sizes();
  for (int l = 0; l < net.depth(); ++l) {
    int in = sizes[l], out = sizes[l + 1];
    std::vector<Interval> next(out);
    bool last = (l + 1 == net.depth());
    for (int j = 0; j < out; ++j) {
      int64_t lo = net.biases()[l][j];
      int64_t hi = lo;
      const int32_t* wrow = &net.weights()[l][static_cast<size_t>(j) * in];
      for (int i = 0; i < in; ++i) {
        Interval t = interval_mul_weight(act[i], wrow[i]);
        lo += t.lo;
        hi += t.hi;
      }
      if (!last && net.activation() == Activation::Relu) {
        lo = std::max<int64_t>(0, lo);
        hi = std::max<int64_t>(0, hi);
      }
      next[j] = {lo, hi};
    }
    act = std::move(next);
  }
  return act;
}

}  // namespace

std::vector<Interval> interval_forward(const ToyNet& net,
                                       const std::vector<Interval>& input_box) {
  if (input_box.size() != static_cast<size_t>(net.input_width())) {
    throw WidthMismatch("input box width mismatch");
  }
  return propagate(net, input_box);
}

bool intervals_force_label(const std::vector<Interval>& logits, int label) {
  // argmax with lowest-index tie-break: `label` wins iff it strictly beats
  // lower indices and is not strictly beaten by higher indices.
  for (int j = 0; j < static_cast<int>(logits.size()); ++j) {
    if (j == label) continue;
    if (j < label) {
      if (!(logits[label].lo > logits[j].hi)) return false;
    } else {
      if (!(logits[label].lo >= logits[j].hi)) return false;
    }
  }
  return true;
}

std::vector<std::vector<Interval>> activation_bounds(const ToyNet& net) {
  const auto& sizes = net.layer_sizes();
  std::vector<std::vector<Interval>> bounds;
  std::vector<Interval> act(sizes.front());
  for (auto& iv : act) iv = {0, kFixedOne};
  bounds.push_back(act);
  for (int l = 0; l < net.depth(); ++l) {
    int in = sizes[l], out = sizes[l + 1];
    std::vector<Interval> next(out);
    bool last = (l + 1 == net.depth());
    for (int j = 0; j < out; ++j) {
      int64_t lo = net.biases()[l][j];
      int64_t hi = lo;
      const int32_t* wrow = &net.weights()[l][static_cast<size_t>(j) * in];
      for (int i = 0; i < in; ++i) {
        Interval t = interval_mul_weight(act[i], wrow[i]);
        lo += t.lo;
        hi += t.hi;
      }
      if (!last && net.activation() == Activation::Relu) {
        lo = std::max<int64_t>(0, lo);
        hi = std::max<int64_t>(0, hi);
      }
      next[j] = {lo, hi};
    }
    bounds.push_back(next);
    act = std::move(next);
  }
  return bounds;
}

}  // namespace vb
