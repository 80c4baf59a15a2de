#include "virtuebench/proofs.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "virtuebench/interval.hpp"

namespace vb {

std::string proof_strategy_name(ProofStrategy s) {
  switch (s) {
    case ProofStrategy::BruteForce: return "brute_force";
    case ProofStrategy::ClusterGuided: return "cluster_guided";
    case ProofStrategy::CircuitGuided: return "circuit_guided";
  }
  throw ValidationError("unreachable strategy");
}

double enumerated_task_accuracy(const ToyNet& net, const TaskSpec& task) {
  if (net.input_width() != task.n) throw WidthMismatch("net width != task width");
  uint32_t total = uint32_t{1} << task.n;
  uint32_t hits = 0;
  for (uint32_t x = 0; x < total; ++x) {
    if (net.label_of(static_cast<uint16_t>(x)) == task_label(task, static_cast<uint16_t>(x))) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

ProofCertificate brute_force_proof(const ToyNet& net, const TaskSpec& task) {
  ProofCertificate cert;
  cert.strategy = ProofStrategy::BruteForce;
  cert.bound = enumerated_task_accuracy(net, task);
  cert.flops = (uint64_t{1} << task.n) * net.forward_flops();
  cert.label = "brute_force";
  return cert;
}

// ---- cluster-guided ---------------------------------------------------------

ProofCertificate cluster_bound_for_cells(const ToyNet& net, const TaskSpec& task,
                                         const std::vector<std::vector<uint16_t>>& cells) {
  int n = task.n;
  uint32_t total = uint32_t{1} << n;
  uint64_t credited = 0;

  for (const auto& cell : cells) {
    if (cell.empty()) continue;
    // Bounding box over the members' input bits.
    std::vector<Interval> box(n);
    for (int j = 0; j < n; ++j) {
      int64_t lo = 1, hi = 0;  // empty until first member
      for (uint16_t x : cell) {
        int64_t bit = (x >> (n - 1 - j)) & 1;
        if (lo > hi) {
          lo = hi = bit;
        } else {
          lo = std::min(lo, bit);
          hi = std::max(hi, bit);
        }
      }
      box[j] = {lo * kFixedOne, hi * kFixedOne};
    }
    // All members must share one target label.
    uint8_t target = task_label(task, cell.front());
    bool shared = std::all_of(cell.begin(), cell.end(),
                              [&](uint16_t x) { return task_label(task, x) == target; });
    if (!shared) continue;
    auto logits = interval_forward(net, box);
    if (intervals_force_label(logits, target)) credited += cell.size();
  }

  ProofCertificate cert;
  cert.strategy = ProofStrategy::ClusterGuided;
  cert.bound = static_cast<double>(credited) / static_cast<double>(total);
  // One interval pass per cell plus box/assignment bookkeeping.
  cert.flops = static_cast<uint64_t>(cells.size()) * net.interval_forward_flops() +
               2ull * static_cast<uint64_t>(n) * total;
  cert.vacuous = credited == 0;
  cert.label = "cluster_guided";
  return cert;
}

ProofCertificate cluster_guided_proof(const ToyNet& net, const TaskSpec& task,
                                      const ClusteringExplanation& clusters) {
  if (clusters.input_width() != task.n) throw WidthMismatch("clustering width != task width");
  ProofCertificate cert = cluster_bound_for_cells(net, task, clusters.cells());
  cert.label = "cluster_guided_k" + std::to_string(clusters.k());
  return cert;
}

// ---- circuit-guided ---------------------------------------------------------

namespace {

// Interval of (model activation - circuit activation) per unit, layer by
// layer. Masked edges contribute the exact spread of the model term around
// the folded ablation constant; active edges propagate the incoming error
// through the weight with one raw unit of floor slack unless the incoming
// error is exactly zero.
std::vector<Interval> logit_error_bounds(const ToyNet& net, const CircuitExplanation& circuit,
                                         const std::vector<std::vector<Interval>>& model_bounds) {
  const auto& sizes = net.layer_sizes();
  std::vector<Interval> err(sizes.front(), Interval{0, 0});  // inputs are exact
  int edge = 0;
  for (int l = 0; l < net.depth(); ++l) {
    int in = sizes[l], out = sizes[l + 1];
    std::vector<Interval> next(out);
    bool last = (l + 1 == net.depth());
    for (int j = 0; j < out; ++j) {
      Interval acc{0, 0};
      const int32_t* wrow = &net.weights()[l][static_cast<size_t>(j) * in];
      for (int i = 0; i < in; ++i) {
        bool active = circuit.edge_mask()[edge + j * in + i];
        int32_t w = wrow[i];
        if (active) {
          const Interval& e = err[i];
          if (e.lo == 0 && e.hi == 0) continue;  // same source value, same floor
          Interval t = interval_mul_weight(e, w);
          acc.lo += t.lo - 1;  // floor slack
          acc.hi += t.hi + 1;
        } else {
          int64_t c = fx_mul_raw(w, circuit.unit_ablation_values()[l][i]);
          Interval m = interval_mul_weight(model_bounds[l][i], w);
          acc.lo += m.lo - c;
          acc.hi += m.hi - c;
        }
      }
      if (!last && net.activation() == Activation::Relu) {
        // relu is monotone and 1-Lipschitz: the error hull gains zero.
        acc.lo = std::min<int64_t>(acc.lo, 0);
        acc.hi = std::max<int64_t>(acc.hi, 0);
      }
      next[j] = acc;
    }
    edge += in * out;
    err = std::move(next);
  }
  return err;
}

}  // namespace

ProofCertificate circuit_guided_proof(const ToyNet& net, const TaskSpec& task,
                                      const CircuitExplanation& circuit) {
  if (circuit.input_width() != task.n) throw WidthMismatch("circuit width != task width");
  uint32_t total = uint32_t{1} << task.n;
  int masked = net.edge_count() - circuit.active_edge_count();

  if (masked == 0) {
    // Nothing ablated: the circuit is the model and the proof is brute force
    // on it.
    ProofCertificate cert = brute_force_proof(net, task);
    cert.strategy = ProofStrategy::CircuitGuided;
    cert.label = "circuit_guided_full";
    return cert;
  }

  auto model_bounds = activation_bounds(net);
  std::vector<Interval> err = logit_error_bounds(net, circuit, model_bounds);

  uint64_t credited = 0;
  for (uint32_t x = 0; x < total; ++x) {
    auto fw = net.forward_masked(static_cast<uint16_t>(x), circuit.edge_mask(),
                                 circuit.unit_ablation_values());
    int labels = net.label_count();
    uint8_t ell = fw.label;
    // The model's logit j lies within [z_j + err_j.lo, z_j + err_j.hi];
    // force the argmax under the lowest-index tie-break.
    bool forced = true;
    for (int j = 0; j < labels && forced; ++j) {
      if (j == static_cast<int>(ell)) continue;
      int64_t lhs = static_cast<int64_t>(fw.logits[ell]) + err[ell].lo;
      int64_t rhs = static_cast<int64_t>(fw.logits[j]) + err[j].hi;
      forced = j < static_cast<int>(ell) ? lhs > rhs : lhs >= rhs;
    }
    if (forced && ell == task_label(task, static_cast<uint16_t>(x))) ++credited;
  }

  ProofCertificate cert;
  cert.strategy = ProofStrategy::CircuitGuided;
  cert.bound = static_cast<double>(credited) / static_cast<double>(total);
  uint64_t biases = 0;
  for (const auto& b : net.biases()) biases += b.size();
  cert.flops = total * (2ull * static_cast<uint64_t>(circuit.active_edge_count()) + biases) +
               2ull * net.interval_forward_flops() + 2ull * static_cast<uint64_t>(masked);
  cert.vacuous = credited == 0;
  cert.label = "circuit_guided_e" + std::to_string(circuit.active_edge_count());
  return cert;
}

ProofCertificate audit_certificate(ProofCertificate cert, const ToyNet& net,
                                   const TaskSpec& task) {
  double exact = enumerated_task_accuracy(net, task);
  cert.sound = cert.bound <= exact + 1e-12;
  return cert;
}

// ---- pareto -----------------------------------------------------------------

std::vector<ParetoPoint> pareto(const std::vector<ParetoPoint>& points) {
  std::vector<size_t> order(points.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return points[a].flops < points[b].flops;
  });
  std::vector<ParetoPoint> out;
  size_t i = 0;
  double best_cheaper = -1.0;  // max bound among strictly cheaper points
  while (i < order.size()) {
    size_t j = i;
    double group_best = -1.0;
    while (j < order.size() && points[order[j]].flops == points[order[i]].flops) {
      group_best = std::max(group_best, points[order[j]].bound);
      ++j;
    }
    for (size_t t = i; t < j; ++t) {
      const ParetoPoint& p = points[order[t]];
      bool dominated = (best_cheaper >= p.bound) || (group_best > p.bound);
      if (!dominated) out.push_back(p);
    }
    best_cheaper = std::max(best_cheaper, group_best);
    i = j;
  }
  return out;
}

// ---- rendering --------------------------------------------------------------

std::string ProofCertificate::to_json() const {
  nlohmann::json j;
  j["bound"] = bound;
  j["flops"] = flops;
  j["strategy"] = proof_strategy_name(strategy);
  j["sound"] = sound;
  j["vacuous"] = vacuous;
  j["label"] = label;
  return j.dump();
}

std::string certificates_to_json(const std::vector<ProofCertificate>& certs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : certs) arr.push_back(nlohmann::json::parse(c.to_json()));
  return arr.dump(2);
}

std::string frontier_to_json(const std::vector<ParetoPoint>& frontier) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : frontier) {
    nlohmann::json j;
    j["bound"] = p.bound;
    j["flops"] = p.flops;
    j["label"] = p.label;
    arr.push_back(j);
  }
  return arr.dump(2);
}

}  // namespace vb
