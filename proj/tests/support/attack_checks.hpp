#pragma once

#include <set>
#include <string>

#include "graphmask/attacks.hpp"

namespace graphmask::testing {

/// Empty string when `r` is a valid edge-only perturbation of `original`,
/// otherwise a description of the first violation.
inline std::string attack_invariant_violation(const FeatureGraph& original, const AttackResult& r) {
  const FeatureGraph& p = r.perturbed;
  if (p.node_count != original.node_count) return "node count changed";
  if (p.label != original.label) return "label changed";
  if (p.graph_id != original.graph_id || r.original_id != original.graph_id) return "id changed";
  if (p.features.rows() != original.features.rows() || p.features.cols() != original.features.cols() ||
      p.features != original.features) {
    return "features changed";
  }
  if (r.original_edge_count != original.edges.size()) return "original edge count wrong";
  const std::set<Edge> before(original.edges.begin(), original.edges.end());
  const std::set<Edge> after(p.edges.begin(), p.edges.end());
  if (after.size() != p.edges.size()) return "duplicate edge in perturbed graph";
  for (const Edge& e : before) {
    if (!after.count(e)) return "original edge removed";
  }
  std::set<Edge> added;
  for (const Edge& e : after) {
    if (!before.count(e)) added.insert(e);
  }
  const std::set<Edge> reported(r.edges_added.begin(), r.edges_added.end());
  if (reported != added || reported.size() != r.edges_added.size()) {
    return "edges_added differs from perturbed minus original";
  }
  for (const auto& [u, v] : added) {
    if (u == v) return "self loop added";
  }
  return {};
}

/// Margin sum(W .* A) + bias; labels benign iff the margin is positive.
class LinearVictim final : public EdgeDifferentiableModel {
 public:
  LinearVictim(Matrix weights, double bias) : w_(std::move(weights)), bias_(bias) {}
  double margin(const FeatureGraph&, const Matrix& a, Matrix* gradient) const override {
    if (gradient) *gradient = w_;
    return (w_.array() * a.array()).sum() + bias_;
  }
  Label label(const FeatureGraph& g) const override {
    return margin(g, dense_adjacency(g), nullptr) > 0.0 ? Label::kBenign : Label::kMalicious;
  }

 private:
  Matrix w_;
  double bias_;
};

/// Always malicious, with zero adjacency gradient.
class EdgeBlindVictim final : public EdgeDifferentiableModel {
 public:
  double margin(const FeatureGraph& g, const Matrix&, Matrix* gradient) const override {
    const auto n = static_cast<Eigen::Index>(g.node_count);
    if (gradient) *gradient = Matrix::Zero(n, n);
    return -1.0;
  }
  Label label(const FeatureGraph&) const override { return Label::kMalicious; }
};

}  // namespace graphmask::testing
