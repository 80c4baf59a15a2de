#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "virtuebench/explainers/circuit.hpp"
#include "virtuebench/explainers/clustering.hpp"
#include "virtuebench/toy_net.hpp"

namespace vb {

enum class ProofStrategy : uint8_t { BruteForce, ClusterGuided, CircuitGuided };
std::string proof_strategy_name(ProofStrategy s);

// A certified lower bound on the model's task accuracy together with the
// FLOP cost of checking it. `sound` is set by an independent enumeration
// audit, never by the prover itself.
struct ProofCertificate {
  double bound = 0.0;
  uint64_t flops = 0;
  ProofStrategy strategy = ProofStrategy::BruteForce;
  bool sound = false;
  bool vacuous = false;  // bound clamped at 0
  std::string label;

  std::string to_json() const;
};

struct ParetoPoint {
  double bound = 0.0;
  uint64_t flops = 0;
  std::string label;
};

// Exact agreement with the task target over all inputs; bound equals the
// true accuracy by construction. flops = 2^n * forward_flops.
ProofCertificate brute_force_proof(const ToyNet& net, const TaskSpec& task);

// One interval propagation per cell over the cell's bounding box; a cell is
// credited only when the intervals force a single label and every enumerated
// point of the box carries that target label. Uncreditable cells contribute
// nothing, so the bound is sound by construction.
ProofCertificate cluster_guided_proof(const ToyNet& net, const TaskSpec& task,
                                      const ClusteringExplanation& clusters);

// Core of the cluster strategy over explicit cells; exposed so refinement
// properties can be tested directly on hand-built partitions.
ProofCertificate cluster_bound_for_cells(const ToyNet& net, const TaskSpec& task,
                                         const std::vector<std::vector<uint16_t>>& cells);

// Enumerates the sparse circuit exactly and certifies the full model against
// it with a worst-case ablation-error interval bound; an input is credited
// when the circuit's logit margin survives the correction and the label
// matches the task target.
ProofCertificate circuit_guided_proof(const ToyNet& net, const TaskSpec& task,
                                      const CircuitExplanation& circuit);

// Exact enumerated task accuracy (the audit reference).
double enumerated_task_accuracy(const ToyNet& net, const TaskSpec& task);

// Sets cert.sound from a full enumeration audit; returns the audited copy.
ProofCertificate audit_certificate(ProofCertificate cert, const ToyNet& net,
                                   const TaskSpec& task);

// Non-dominated set (higher bound better, lower flops better), stable order
// by flops ascending.
std::vector<ParetoPoint> pareto(const std::vector<ParetoPoint>& points);

std::string certificates_to_json(const std::vector<ProofCertificate>& certs);
std::string frontier_to_json(const std::vector<ParetoPoint>& frontier);

// Standalone SVG scatter of all points with the frontier polyline,
// log-scale FLOPs vs bound.
std::string frontier_svg(const std::vector<ParetoPoint>& all_points,
                         const std::vector<ParetoPoint>& frontier);

}  // namespace vb
