#include "virtuebench/toy_net.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "virtuebench/errors.hpp"
#include "virtuebench/interval.hpp"

namespace vb {

TaskSpec task_by_name(const std::string& id) {
  if (id == "majority8") return {TaskName::Majority8, 8, 2, "majority8"};
  if (id == "parity8") return {TaskName::Parity8, 8, 2, "parity8"};
  if (id == "modadd7") return {TaskName::ModAdd7, 6, 7, "modadd7"};
  throw ValidationError("unknown task: " + id);
}

uint8_t task_label(const TaskSpec& task, uint16_t input) {
  switch (task.name) {
    case TaskName::Majority8:
      // More ones than zeros; the 4/4 tie maps to label 0.
      return std::popcount(static_cast<unsigned>(input & 0xff)) >= 5 ? 1 : 0;
    case TaskName::Parity8:
      return static_cast<uint8_t>(std::popcount(static_cast<unsigned>(input & 0xff)) & 1);
    case TaskName::ModAdd7: {
      int a = (input >> 3) & 7;
      int b = input & 7;
      return static_cast<uint8_t>((a + b) % 7);
    }
  }
  throw ValidationError("unreachable task");
}

std::vector<int> default_arch(const TaskSpec& task) {
  switch (task.name) {
    case TaskName::Majority8: return {8, 6, 2};
    case TaskName::Parity8: return {8, 10, 2};
    case TaskName::ModAdd7: return {6, 16, 7};
  }
  throw ValidationError("unreachable task");
}

ToyNet::ToyNet(std::vector<int> layer_sizes, std::vector<std::vector<int32_t>> weights,
               std::vector<std::vector<int32_t>> biases, Activation activation, uint64_t seed)
    : sizes_(std::move(layer_sizes)),
      weights_(std::move(weights)),
      biases_(std::move(biases)),
      activation_(activation),
      seed_(seed) {
  if (sizes_.size() < 2) throw ValidationError("net needs at least one weight layer");
  if (sizes_.front() < 1 || sizes_.front() > 12) {
    throw ValidationError("input width must be in [1, 12]");
  }
  if (weights_.size() != sizes_.size() - 1 || biases_.size() != sizes_.size() - 1) {
    throw ValidationError("layer count mismatch");
  }
  edge_count_ = 0;
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    size_t expect = static_cast<size_t>(sizes_[l]) * static_cast<size_t>(sizes_[l + 1]);
    if (weights_[l].size() != expect) throw ValidationError("weight matrix shape mismatch");
    if (biases_[l].size() != static_cast<size_t>(sizes_[l + 1])) {
      throw ValidationError("bias vector shape mismatch");
    }
    edge_count_ += static_cast<int>(expect);
  }
  check_ranges();
}

void ToyNet::check_ranges() const {
  // Interval propagation of the whole input box; all intermediate values must
  // stay inside the Q8.24 int32 range so every forward pass is overflow-free.
  auto bounds = activation_bounds(*this);
  for (const auto& layer : bounds) {
    for (const Interval& iv : layer) {
      if (iv.lo < kFixedMin || iv.hi > kFixedMax) {
        throw FixedOverflow("architecture can overflow Q8.24");
      }
    }
  }
}

EdgeRef ToyNet::edge_ref(int edge_index) const {
  int e = edge_index;
  for (int l = 0; l + 1 < static_cast<int>(sizes_.size()); ++l) {
    int block = sizes_[l] * sizes_[l + 1];
    if (e < block) return {l, e / sizes_[l], e % sizes_[l]};
    e -= block;
  }
  throw ValidationError("edge index out of range");
}

int32_t ToyNet::edge_weight(int edge_index) const {
  EdgeRef r = edge_ref(edge_index);
  return weights_[r.layer][static_cast<size_t>(r.to) * sizes_[r.layer] + r.from];
}

size_t ToyNet::parameter_count() const {
  size_t c = 0;
  for (size_t l = 0; l < weights_.size(); ++l) c += weights_[l].size() + biases_[l].size();
  return c;
}

namespace {

inline int32_t apply_activation(int64_t pre, Activation act) {
  int64_t v = act == Activation::Relu ? std::max<int64_t>(0, pre) : pre;
  return checked_narrow(v, "activation");
}

}  // namespace

ToyNet::ForwardResult ToyNet::forward(uint16_t input_bits) const {
  if ((input_bits >> sizes_.front()) != 0) throw WidthMismatch("input wider than net");
  std::vector<int32_t> act(sizes_.front());
  int n = sizes_.front();
  for (int j = 0; j < n; ++j) {
    act[j] = ((input_bits >> (n - 1 - j)) & 1) ? static_cast<int32_t>(kFixedOne) : 0;
  }
  return forward_from_layer(0, act);
}

ToyNet::ForwardResult ToyNet::forward_from_layer(int layer,
                                                 const std::vector<int32_t>& activations) const {
  if (layer < 0 || layer > depth()) throw ValidationError("layer index out of range");
  if (activations.size() != static_cast<size_t>(sizes_[layer])) {
    throw WidthMismatch("activation vector width mismatch");
  }
  std::vector<int32_t> act = activations;
  for (int l = layer; l < depth(); ++l) {
    int in = sizes_[l], out = sizes_[l + 1];
    std::vector<int32_t> next(out);
    bool last = (l + 1 == depth());
    for (int j = 0; j < out; ++j) {
      int64_t pre = biases_[l][j];
      const int32_t* wrow = &weights_[l][static_cast<size_t>(j) * in];
      for (int i = 0; i < in; ++i) {
        pre += fx_mul_raw(wrow[i], act[i]);
      }
      next[j] = last ? checked_narrow(pre, "logit") : apply_activation(pre, activation_);
    }
    act = std::move(next);
  }
  uint8_t label = 0;
  for (size_t j = 1; j < act.size(); ++j) {
    if (act[j] > act[label]) label = static_cast<uint8_t>(j);
  }
  return {label, std::move(act)};
}

std::vector<int32_t> ToyNet::layer_activations(uint16_t input_bits, int layer) const {
  if (layer < 0 || layer > depth()) throw ValidationError("layer index out of range");
  std::vector<int32_t> act(sizes_.front());
  int n = sizes_.front();
  for (int j = 0; j < n; ++j) {
    act[j] = ((input_bits >> (n - 1 - j)) & 1) ? static_cast<int32_t>(kFixedOne) : 0;
  }
  for (int l = 0; l < layer; ++l) {
    int in = sizes_[l], out = sizes_[l + 1];
    std::vector<int32_t> next(out);
    bool last = (l + 1 == depth());
    for (int j = 0; j < out; ++j) {
      int64_t pre = biases_[l][j];
      const int32_t* wrow = &weights_[l][static_cast<size_t>(j) * in];
      for (int i = 0; i < in; ++i) pre += fx_mul_raw(wrow[i], act[i]);
      next[j] = last ? checked_narrow(pre, "logit") : apply_activation(pre, activation_);
    }
    act = std::move(next);
  }
  return act;
}

ToyNet::ForwardResult ToyNet::forward_masked(
    uint16_t input_bits, const std::vector<bool>& edge_mask,
    const std::vector<std::vector<int32_t>>& unit_ablation) const {
  if (edge_mask.size() != static_cast<size_t>(edge_count_)) {
    throw ValidationError("edge mask length mismatch");
  }
  std::vector<int32_t> act(sizes_.front());
  int n = sizes_.front();
  for (int j = 0; j < n; ++j) {
    act[j] = ((input_bits >> (n - 1 - j)) & 1) ? static_cast<int32_t>(kFixedOne) : 0;
  }
  size_t edge = 0;
  for (int l = 0; l < depth(); ++l) {
    int in = sizes_[l], out = sizes_[l + 1];
    std::vector<int32_t> next(out);
    bool last = (l + 1 == depth());
    for (int j = 0; j < out; ++j) {
      int64_t pre = biases_[l][j];
      const int32_t* wrow = &weights_[l][static_cast<size_t>(j) * in];
      for (int i = 0; i < in; ++i) {
        int32_t source = edge_mask[edge + static_cast<size_t>(j) * in + i]
                             ? act[i]
                             : unit_ablation[l][i];
        pre += fx_mul_raw(wrow[i], source);
      }
      next[j] = last ? checked_narrow(pre, "logit") : apply_activation(pre, activation_);
    }
    edge += static_cast<size_t>(in) * out;
    act = std::move(next);
  }
  uint8_t label = 0;
  for (size_t j = 1; j < act.size(); ++j) {
    if (act[j] > act[label]) label = static_cast<uint8_t>(j);
  }
  return {label, std::move(act)};
}

std::vector<std::vector<int32_t>> ToyNet::mean_activations() const {
  int n = sizes_.front();
  uint32_t total = uint32_t{1} << n;
  std::vector<std::vector<int64_t>> sums(depth());
  for (int l = 0; l < depth(); ++l) sums[l].assign(sizes_[l], 0);
  for (uint32_t x = 0; x < total; ++x) {
    for (int l = 0; l < depth(); ++l) {
      auto act = layer_activations(static_cast<uint16_t>(x), l);
      for (int u = 0; u < sizes_[l]; ++u) sums[l][u] += act[u];
    }
  }
  std::vector<std::vector<int32_t>> means(depth());
  for (int l = 0; l < depth(); ++l) {
    means[l].resize(sizes_[l]);
    for (int u = 0; u < sizes_[l]; ++u) {
      means[l][u] = quantize_raw(sums[l][u] >> n, kDefaultQuantBits);
    }
  }
  return means;
}

std::vector<Observation> ToyNet::enumerate_io() const {
  int n = sizes_.front();
  uint32_t total = uint32_t{1} << n;
  std::vector<Observation> rows;
  rows.reserve(total);
  for (uint32_t x = 0; x < total; ++x) {
    rows.push_back({static_cast<uint16_t>(x), static_cast<uint8_t>(n), label_of(static_cast<uint16_t>(x))});
  }
  return rows;
}

uint64_t ToyNet::forward_flops() const {
  uint64_t f = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    f += 2 * weights_[l].size() + biases_[l].size();
  }
  return f;
}

uint64_t ToyNet::interval_forward_flops() const {
  uint64_t f = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    f += 8 * weights_[l].size() + 2 * biases_[l].size();
  }
  return f;
}

// ---- blob ------------------------------------------------------------

namespace {
void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
uint32_t get_u32(const std::vector<uint8_t>& in, size_t& pos) {
  if (pos + 4 > in.size()) throw DecodeError("net blob truncated");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[pos++]) << (8 * i);
  return v;
}
uint64_t get_u64(const std::vector<uint8_t>& in, size_t& pos) {
  if (pos + 8 > in.size()) throw DecodeError("net blob truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[pos++]) << (8 * i);
  return v;
}
}  // namespace

std::vector<uint8_t> ToyNet::to_blob() const {
  std::vector<uint8_t> out = {'X', 'T', 'N', '1'};
  out.push_back(static_cast<uint8_t>(sizes_.size()));
  for (int s : sizes_) out.push_back(static_cast<uint8_t>(s));
  out.push_back(static_cast<uint8_t>(activation_));
  put_u64(out, seed_);
  for (size_t l = 0; l < weights_.size(); ++l) {
    for (int32_t w : weights_[l]) put_u32(out, static_cast<uint32_t>(w));
    for (int32_t b : biases_[l]) put_u32(out, static_cast<uint32_t>(b));
  }
  return out;
}

ToyNet ToyNet::from_blob(const std::vector<uint8_t>& blob) {
  if (blob.size() < 6 || std::memcmp(blob.data(), "XTN1", 4) != 0) {
    throw DecodeError("bad net blob magic");
  }
  size_t pos = 4;
  int nlayers = blob[pos++];
  if (nlayers < 2 || pos + nlayers > blob.size()) throw DecodeError("bad net blob header");
  std::vector<int> sizes(nlayers);
  for (int i = 0; i < nlayers; ++i) sizes[i] = blob[pos++];
  Activation act = static_cast<Activation>(blob[pos++]);
  uint64_t seed = get_u64(blob, pos);
  std::vector<std::vector<int32_t>> weights(nlayers - 1), biases(nlayers - 1);
  for (int l = 0; l + 1 < nlayers; ++l) {
    weights[l].resize(static_cast<size_t>(sizes[l]) * sizes[l + 1]);
    for (auto& w : weights[l]) w = static_cast<int32_t>(get_u32(blob, pos));
    biases[l].resize(sizes[l + 1]);
    for (auto& b : biases[l]) b = static_cast<int32_t>(get_u32(blob, pos));
  }
  if (pos != blob.size()) throw DecodeError("trailing bytes in net blob");
  return ToyNet(std::move(sizes), std::move(weights), std::move(biases), act, seed);
}

// ---- training ---------------------------------------------------------

namespace {

double task_accuracy_of(const ToyNet& net, const TaskSpec& task) {
  uint32_t total = uint32_t{1} << task.n;
  uint32_t hits = 0;
  for (uint32_t x = 0; x < total; ++x) {
    if (net.label_of(static_cast<uint16_t>(x)) == task_label(task, static_cast<uint16_t>(x))) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

constexpr int32_t kWeightClamp = static_cast<int32_t>(kFixedOne);  // |w| <= 1

inline int32_t clamp_weight(int64_t w) {
  return static_cast<int32_t>(std::clamp<int64_t>(w, -kWeightClamp, kWeightClamp));
}

}  // namespace

TrainResult train_toy(const TaskSpec& task, uint64_t seed) {
  std::vector<int> sizes = default_arch(task);
  if (sizes.size() != 3) throw ValidationError("train_toy supports one hidden layer");
  Rng rng(Rng::mix(seed, 0x7031));
  std::vector<std::vector<int32_t>> weights(sizes.size() - 1), biases(sizes.size() - 1);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    weights[l].resize(static_cast<size_t>(sizes[l]) * sizes[l + 1]);
    // Init on the 2^-8 grid in [-0.5, 0.5].
    for (auto& w : weights[l]) {
      w = (static_cast<int32_t>(rng.next_below(257)) - 128) << 16;
    }
    biases[l].assign(sizes[l + 1], 0);
  }

  int n = sizes.front();
  int labels = sizes.back();
  uint32_t total = uint32_t{1} << n;
  constexpr int64_t kLr = kFixedOne / 2;  // 0.5
  const int kStepCap = 10000;
  const double kTarget = 0.95;

  // Mutable working net; ToyNet is immutable, so training works on raw
  // matrices and constructs nets only for evaluation.
  auto make_net = [&]() {
    return ToyNet(sizes, weights, biases, Activation::Relu, seed);
  };

  double best_acc = -1.0;
  std::vector<std::vector<int32_t>> best_w = weights, best_b = biases;
  int steps = 0;
  bool converged = false;

  std::vector<int64_t> gw1, gb1, gw2, gb2;
  for (; steps < kStepCap; ++steps) {
    {
      ToyNet net = make_net();
      double acc = task_accuracy_of(net, task);
      if (acc > best_acc) {
        best_acc = acc;
        best_w = weights;
        best_b = biases;
      }
      if (acc >= kTarget) {
        converged = true;
        break;
      }
    }
    // One full-batch step. Only the 2-layer case is shipped; deeper nets
    // would need a general backprop loop.
    int hidden = sizes[1];
    gw1.assign(weights[0].size(), 0);
    gb1.assign(biases[0].size(), 0);
    gw2.assign(weights[1].size(), 0);
    gb2.assign(biases[1].size(), 0);
    for (uint32_t x = 0; x < total; ++x) {
      std::vector<int32_t> in(n);
      for (int j = 0; j < n; ++j) {
        in[j] = ((x >> (n - 1 - j)) & 1) ? static_cast<int32_t>(kFixedOne) : 0;
      }
      // forward
      std::vector<int64_t> pre(hidden);
      std::vector<int32_t> h(hidden);
      for (int k = 0; k < hidden; ++k) {
        int64_t p = biases[0][k];
        for (int i = 0; i < n; ++i) p += fx_mul_raw(weights[0][static_cast<size_t>(k) * n + i], in[i]);
        pre[k] = p;
        h[k] = static_cast<int32_t>(std::max<int64_t>(0, p));
      }
      std::vector<int64_t> z(labels);
      for (int j = 0; j < labels; ++j) {
        int64_t p = biases[1][j];
        for (int k = 0; k < hidden; ++k) {
          p += fx_mul_raw(weights[1][static_cast<size_t>(j) * hidden + k], h[k]);
        }
        z[j] = p;
      }
      // squared error against +-1 targets
      uint8_t t = task_label(task, static_cast<uint16_t>(x));
      std::vector<int64_t> dz(labels);
      for (int j = 0; j < labels; ++j) {
        int64_t target = (j == t) ? kFixedOne : -kFixedOne;
        dz[j] = z[j] - target;  // d(L/2)/dz
      }
      for (int j = 0; j < labels; ++j) {
        gb2[j] += dz[j];
        for (int k = 0; k < hidden; ++k) {
          gw2[static_cast<size_t>(j) * hidden + k] += fx_mul_raw(dz[j], h[k]);
        }
      }
      for (int k = 0; k < hidden; ++k) {
        if (pre[k] <= 0) continue;
        int64_t dh = 0;
        for (int j = 0; j < labels; ++j) {
          dh += fx_mul_raw(dz[j], weights[1][static_cast<size_t>(j) * hidden + k]);
        }
        gb1[k] += dh;
        for (int i = 0; i < n; ++i) {
          gw1[static_cast<size_t>(k) * n + i] += fx_mul_raw(dh, in[i]);
        }
      }
    }
    // mean gradient, learning-rate scaled, clamped step
    auto step = [&](std::vector<int32_t>& param, const std::vector<int64_t>& grad) {
      for (size_t i = 0; i < param.size(); ++i) {
        int64_t g = grad[i] >> n;  // batch mean
        param[i] = clamp_weight(param[i] - fx_mul_raw(kLr, g));
      }
    };
    step(weights[0], gw1);
    step(biases[0], gb1);
    step(weights[1], gw2);
    step(biases[1], gb2);
  }
  if (!converged) {
    ToyNet net = make_net();
    double acc = task_accuracy_of(net, task);
    if (acc > best_acc) {
      best_acc = acc;
      best_w = weights;
      best_b = biases;
    }
  }

  // Round the best parameters onto the 16-bit serialization grid; the
  // straightforward explanation is exact only for grid-aligned nets.
  for (auto& layer : best_w) {
    for (auto& w : layer) w = quantize_raw(w, kDefaultQuantBits);
  }
  for (auto& layer : best_b) {
    for (auto& b : layer) b = quantize_raw(b, kDefaultQuantBits);
  }
  auto net = std::make_shared<const ToyNet>(sizes, best_w, best_b, Activation::Relu, seed);
  double final_acc = task_accuracy_of(*net, task);
  return {net, final_acc, converged && final_acc >= kTarget, steps};
}

std::vector<Observation> sample_observations(const ToyNet& net, size_t count, Rng& rng) {
  int n = net.input_width();
  std::vector<Observation> obs;
  obs.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    uint16_t x = static_cast<uint16_t>(rng.next_below(uint64_t{1} << n));
    obs.push_back({x, static_cast<uint8_t>(n), net.label_of(x)});
  }
  return obs;
}

Dataset sample_dataset(const ToyNet& net, const TaskSpec& task, size_t size, uint64_t seed) {
  Rng rng(Rng::mix(seed, 0xd5));
  auto obs = sample_observations(net, size, rng);
  size_t heldout = size / 5;  // 80/20
  Dataset d;
  d.train.assign(obs.begin(), obs.end() - static_cast<ptrdiff_t>(heldout));
  d.heldout.assign(obs.end() - static_cast<ptrdiff_t>(heldout), obs.end());
  d.generator_seed = seed;
  d.generator_spec = "uniform:" + task.id + ":" + std::to_string(task.n);
  return d;
}

Dataset full_enumeration_dataset(const ToyNet& net) {
  Dataset d;
  d.train = net.enumerate_io();
  d.generator_seed = 0;
  d.generator_spec = "enumerate:" + std::to_string(net.input_width());
  return d;
}

}  // namespace vb
