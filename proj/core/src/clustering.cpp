#include "virtuebench/explainers/clustering.hpp"

#include <algorithm>
#include <cmath>

namespace vb {

namespace {

using u128 = unsigned __int128;

u128 sq_dist(const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
  u128 d = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    int64_t diff = static_cast<int64_t>(a[i]) - static_cast<int64_t>(b[i]);
    d += static_cast<u128>(diff < 0 ? -diff : diff) * static_cast<u128>(diff < 0 ? -diff : diff);
  }
  return d;
}

std::vector<int32_t> embed_input_bits(uint16_t x, int n) {
  std::vector<int32_t> v(n);
  for (int j = 0; j < n; ++j) {
    v[j] = ((x >> (n - 1 - j)) & 1) ? static_cast<int32_t>(kFixedOne) : 0;
  }
  return v;
}

}  // namespace

ClusteringExplanation::ClusteringExplanation(std::shared_ptr<const ToyNet> net, ClusterSpace space,
                                             int layer_index, int input_width, int label_count,
                                             std::vector<std::vector<int32_t>> centroids,
                                             std::vector<std::vector<uint32_t>> cell_label_counts,
                                             bool tie_rule_enabled)
    : net_(std::move(net)),
      space_(space),
      layer_index_(layer_index),
      n_(input_width),
      label_count_(label_count),
      centroids_(std::move(centroids)),
      cell_label_counts_(std::move(cell_label_counts)),
      tie_rule_enabled_(tie_rule_enabled) {
  if (space_ == ClusterSpace::Layer && !net_) {
    throw ValidationError("activation-space clustering needs the subject net");
  }
  if (n_ < 1 || n_ > 12) throw ValidationError("input width out of range");
  if (label_count_ < 1) throw ValidationError("label count out of range");
  if (cell_label_counts_.size() != centroids_.size()) {
    throw ValidationError("one label histogram per centroid required");
  }
  for (const auto& counts : cell_label_counts_) {
    if (counts.size() != static_cast<size_t>(label_count_)) {
      throw ValidationError("label histogram width mismatch");
    }
  }
  // Precompute smoothed per-cell distributions. Counts are exact integers,
  // so these reproduce bit-for-bit after a serialize round trip.
  cell_dist_.resize(centroids_.size());
  for (size_t c = 0; c < centroids_.size(); ++c) {
    uint64_t total = 0;
    for (uint32_t v : cell_label_counts_[c]) total += v;
    std::vector<double>& dist = cell_dist_[c];
    dist.assign(label_count_, 0.0);
    for (int y = 0; y < label_count_; ++y) {
      double raw = total == 0 ? 1.0 / label_count_
                              : static_cast<double>(cell_label_counts_[c][y]) /
                                    static_cast<double>(total);
      dist[y] = (1.0 - kSmoothingEps) * raw + kSmoothingEps / label_count_;
    }
  }
}

std::vector<int32_t> ClusteringExplanation::embed(uint16_t input_bits) const {
  if (space_ == ClusterSpace::Input) return embed_input_bits(input_bits, n_);
  return net_->layer_activations(input_bits, layer_index_);
}

int ClusteringExplanation::assign(const std::vector<int32_t>& point) const {
  int best = -1;
  u128 best_d = 0;
  for (size_t c = 0; c < centroids_.size(); ++c) {
    u128 d = sq_dist(point, centroids_[c]);
    if (best < 0 || d < best_d) {
      best = static_cast<int>(c);
      best_d = d;
    }
  }
  return best;
}

std::vector<double> ClusteringExplanation::predict(uint16_t input_bits) const {
  if (centroids_.empty()) {
    return std::vector<double>(label_count_, 1.0 / label_count_);
  }
  return cell_dist_[assign(embed(input_bits))];
}

std::vector<std::vector<uint16_t>> ClusteringExplanation::cells() const {
  std::vector<std::vector<uint16_t>> cells(centroids_.size());
  uint32_t total = uint32_t{1} << n_;
  for (uint32_t x = 0; x < total; ++x) {
    int c = assign(embed(static_cast<uint16_t>(x)));
    if (c >= 0) cells[c].push_back(static_cast<uint16_t>(x));
  }
  return cells;
}

SymbolStream ClusteringExplanation::to_stream(const BackgroundTheory& b) const {
  int qb = b.quantization_bits();
  SymbolStream s;
  s.push_back(Field::symbol(Sym::FamClustering));
  s.push_back(Field::symbol(space_ == ClusterSpace::Input ? Sym::SpaceInput : Sym::SpaceLayer));
  s.push_back(Field::literal(static_cast<uint64_t>(layer_index_), 8));
  s.push_back(Field::literal(centroids_.size(), 8));
  size_t dim = centroids_.empty() ? (space_ == ClusterSpace::Input
                                         ? static_cast<size_t>(n_)
                                         : net_->layer_sizes()[layer_index_])
                                  : centroids_.front().size();
  s.push_back(Field::literal(dim, 8));
  s.push_back(Field::literal(static_cast<uint64_t>(label_count_), 8));
  s.push_back(Field::literal(tie_rule_enabled_ ? 1 : 0, 1));
  for (const auto& c : centroids_) {
    for (int32_t v : c) s.push_back(Field::literal(encode_quantized(quantize_raw(v, qb), qb), qb));
  }
  for (const auto& counts : cell_label_counts_) {
    for (uint32_t v : counts) s.push_back(Field::literal(v, 16));
  }
  return s;
}

bool ClusteringExplanation::internal_constraints_ok() const {
  if (centroids_.empty()) return false;  // no cells cannot partition the space
  size_t dim = centroids_.front().size();
  for (const auto& c : centroids_) {
    if (c.size() != dim) return false;
  }
  if (!tie_rule_enabled_) {
    // Without the lowest-index tie rule, any equidistant pair makes the cell
    // map ambiguous: no longer a partition.
    uint32_t total = uint32_t{1} << n_;
    for (uint32_t x = 0; x < total; ++x) {
      auto p = embed(static_cast<uint16_t>(x));
      u128 best = 0;
      int hits = 0;
      for (size_t c = 0; c < centroids_.size(); ++c) {
        u128 d = sq_dist(p, centroids_[c]);
        if (c == 0 || d < best) {
          best = d;
          hits = 1;
        } else if (d == best) {
          ++hits;
        }
      }
      if (hits > 1) return false;
    }
  }
  return true;
}

EditAlphabet ClusteringExplanation::edit_alphabet(const BackgroundTheory& b) const {
  return {{Sym::SpaceInput, Sym::SpaceLayer}, {1, 8, b.quantization_bits(), 16}};
}

ExplanationPtr ClusteringExplanation::from_source(FieldSource& src, const BackgroundTheory& b,
                                                  const DecodeContext& ctx) {
  int qb = b.quantization_bits();
  Sym space_sym = src.next_symbol();
  if (space_sym != Sym::SpaceInput && space_sym != Sym::SpaceLayer) {
    throw DecodeError("bad clustering space symbol");
  }
  ClusterSpace space = space_sym == Sym::SpaceInput ? ClusterSpace::Input : ClusterSpace::Layer;
  int layer = static_cast<int>(src.next_literal(8));
  int k = static_cast<int>(src.next_literal(8));
  int dim = static_cast<int>(src.next_literal(8));
  int labels = static_cast<int>(src.next_literal(8));
  bool tie = src.next_literal(1) != 0;
  if (labels < 1 || dim < 1) throw DecodeError("bad clustering header");

  int n;
  if (space == ClusterSpace::Input) {
    n = dim;
    if (n > 12) throw DecodeError("input-space dim too wide");
  } else {
    if (!ctx.net) throw DecodeError("activation-space clustering needs a decode net");
    if (layer < 1 || layer > ctx.net->depth()) throw DecodeError("bad layer index");
    if (dim != ctx.net->layer_sizes()[layer]) throw DecodeError("dim != layer width");
    if (labels != ctx.net->label_count()) throw DecodeError("label count mismatch");
    n = ctx.net->input_width();
  }
  std::vector<std::vector<int32_t>> centroids(k, std::vector<int32_t>(dim));
  for (auto& c : centroids) {
    for (auto& v : c) v = decode_quantized(src.next_literal(qb), qb);
  }
  std::vector<std::vector<uint32_t>> counts(k, std::vector<uint32_t>(labels));
  for (auto& row : counts) {
    for (auto& v : row) v = static_cast<uint32_t>(src.next_literal(16));
  }
  try {
    return std::make_shared<ClusteringExplanation>(
        space == ClusterSpace::Layer ? ctx.net : nullptr, space, layer, n, labels,
        std::move(centroids), std::move(counts), tie);
  } catch (const std::exception& e) {
    throw DecodeError(std::string("invalid clustering: ") + e.what());
  }
}

// ---- fitting ---------------------------------------------------------------

std::shared_ptr<const ClusteringExplanation> fit_clustering(std::shared_ptr<const ToyNet> net,
                                                            ClusterSpace space, int layer_index,
                                                            int k, uint64_t seed) {
  if (!net) throw ValidationError("fit_clustering needs a net");
  int n = net->input_width();
  uint32_t total = uint32_t{1} << n;
  if (k < 1 || static_cast<uint32_t>(k) > total) throw ValidationError("k out of range");
  if (space == ClusterSpace::Layer && (layer_index < 1 || layer_index > net->depth())) {
    throw ValidationError("layer index out of range");
  }

  std::vector<std::vector<int32_t>> points(total);
  for (uint32_t x = 0; x < total; ++x) {
    points[x] = space == ClusterSpace::Input
                    ? embed_input_bits(static_cast<uint16_t>(x), n)
                    : net->layer_activations(static_cast<uint16_t>(x), layer_index);
  }
  size_t dim = points.front().size();

  Rng rng(Rng::mix(seed, 0x6b6d));

  // k-means++ seeding: squared-distance weighted draws.
  std::vector<std::vector<int32_t>> centroids;
  centroids.push_back(points[rng.next_below(total)]);
  while (static_cast<int>(centroids.size()) < k) {
    std::vector<u128> d2(total);
    u128 sum = 0;
    for (uint32_t x = 0; x < total; ++x) {
      u128 best = sq_dist(points[x], centroids[0]);
      for (size_t c = 1; c < centroids.size(); ++c) {
        best = std::min(best, sq_dist(points[x], centroids[c]));
      }
      d2[x] = best;
      sum += best;
    }
    uint32_t pick;
    if (sum == 0) {
      pick = static_cast<uint32_t>(rng.next_below(total));
    } else {
      u128 r = ((static_cast<u128>(rng.next_u64()) << 64) | rng.next_u64()) % sum;
      u128 acc = 0;
      pick = total - 1;
      for (uint32_t x = 0; x < total; ++x) {
        acc += d2[x];
        if (r < acc) {
          pick = x;
          break;
        }
      }
    }
    centroids.push_back(points[pick]);
  }

  auto assign_all = [&](std::vector<int>& assignment) {
    for (uint32_t x = 0; x < total; ++x) {
      int best = 0;
      u128 best_d = sq_dist(points[x], centroids[0]);
      for (int c = 1; c < k; ++c) {
        u128 d = sq_dist(points[x], centroids[c]);
        if (d < best_d) {
          best = c;
          best_d = d;
        }
      }
      assignment[x] = best;
    }
  };

  std::vector<int> assignment(total, -1), prev(total, -2);
  for (int iter = 0; iter < 100; ++iter) {
    assign_all(assignment);

    // Re-seed empty cells from the farthest point, lowest centroid index
    // first, re-assigning after each fix.
    for (int c = 0; c < k; ++c) {
      bool empty = std::none_of(assignment.begin(), assignment.end(),
                                [&](int a) { return a == c; });
      if (!empty) continue;
      u128 far_d = 0;
      uint32_t far_x = 0;
      for (uint32_t x = 0; x < total; ++x) {
        u128 best = sq_dist(points[x], centroids[0]);
        for (int cc = 1; cc < k; ++cc) best = std::min(best, sq_dist(points[x], centroids[cc]));
        if (best > far_d) {
          far_d = best;
          far_x = x;
        }
      }
      centroids[c] = points[far_x];
      assign_all(assignment);
    }

    if (assignment == prev) break;
    prev = assignment;

    std::vector<std::vector<int64_t>> sums(k, std::vector<int64_t>(dim, 0));
    std::vector<int64_t> member_count(k, 0);
    for (uint32_t x = 0; x < total; ++x) {
      ++member_count[assignment[x]];
      for (size_t i = 0; i < dim; ++i) sums[assignment[x]][i] += points[x][i];
    }
    for (int c = 0; c < k; ++c) {
      if (member_count[c] == 0) continue;
      for (size_t i = 0; i < dim; ++i) {
        centroids[c][i] = static_cast<int32_t>(sums[c][i] / member_count[c]);
      }
    }
  }

  // Final centroids on the 16-bit parameter grid; cell statistics are taken
  // against the rounded centroids so the stored explanation is self-coherent.
  for (auto& c : centroids) {
    for (auto& v : c) v = quantize_raw(v, kDefaultQuantBits);
  }
  auto tmp = ClusteringExplanation(space == ClusterSpace::Layer ? net : nullptr, space,
                                   layer_index, n, net->label_count(), centroids,
                                   std::vector<std::vector<uint32_t>>(
                                       k, std::vector<uint32_t>(net->label_count(), 0)),
                                   true);
  std::vector<std::vector<uint32_t>> counts(k, std::vector<uint32_t>(net->label_count(), 0));
  for (uint32_t x = 0; x < total; ++x) {
    int c = tmp.assign(points[x]);
    ++counts[c][net->label_of(static_cast<uint16_t>(x))];
  }
  return std::make_shared<const ClusteringExplanation>(
      space == ClusterSpace::Layer ? net : nullptr, space, layer_index, n, net->label_count(),
      std::move(centroids), std::move(counts), true);
}

}  // namespace vb
