#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "graphmask/graph.hpp"
#include "graphmask/model.hpp"

namespace graphmask {

struct AttackConfig {
  std::size_t max_iterations = 100;
  std::size_t ig_steps = 20;
  std::size_t edges_per_iteration = 1;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct AttackResult {
  std::string original_id;
  /// Original edges first, in their original order, then the added edges.
  FeatureGraph perturbed;
  bool success = false;
  std::size_t iterations_used = 0;
  std::vector<Edge> edges_added;
  std::size_t original_edge_count = 0;
  /// Label queries issued to the victim, including the initial check.
  std::size_t queries = 0;
};

/// A classifier whose decision margin can be differentiated with respect to
/// a relaxed (real-valued) adjacency matrix.
class EdgeDifferentiableModel {
 public:
  virtual ~EdgeDifferentiableModel() = default;

  /// score_benign - score_malicious with `adjacency` (n x n, entries in
  /// [0,1]) in place of the graph's edges. Writes d margin / d adjacency into
  /// `gradient` when it is non-null.
  virtual double margin(const FeatureGraph& g, const Matrix& adjacency, Matrix* gradient) const = 0;
  virtual Label label(const FeatureGraph& g) const = 0;
};

/// The trained detector seen as an attack target.
class DetectorModel final : public EdgeDifferentiableModel {
 public:
  explicit DetectorModel(const ModelParams& params) : params_(params) {}
  double margin(const FeatureGraph& g, const Matrix& adjacency, Matrix* gradient) const override;
  Label label(const FeatureGraph& g) const override;

 private:
  const ModelParams& params_;
};

using LabelOracle = std::function<Label(const FeatureGraph&)>;

/// Absent ordered pairs (u, v), u != v, in lexicographic order.
std::vector<Edge> candidate_edges(const FeatureGraph& g);

struct EdgeScore {
  Edge edge;
  double score = 0.0;
};

/// Integrated gradients of the margin along the straight path that raises
/// every candidate entry from 0 to 1 together:
///   IG(e) = (1/m) * sum_{k=1..m} d f(A + (k/m) C) / d A_e,
/// where C marks all candidates. Higher means adding e pushes harder toward
/// benign. Returned in candidate_edges() order. Throws InvalidInput when the
/// graph has no candidates.
std::vector<EdgeScore> edge_saliency_ig(const EdgeDifferentiableModel& model,
                                        const FeatureGraph& g, std::size_t ig_steps);

/// Greedy edge insertion guided by the victim's own gradients. Throws
/// InvalidInput if the victim already labels the graph benign.
AttackResult whitebox_attack(const EdgeDifferentiableModel& victim, const FeatureGraph& g,
                             const AttackConfig& config);

/// Same loop, but saliency comes from `surrogate` and success is judged by
/// querying `victim` after every insertion.
AttackResult blackbox_attack(const LabelOracle& victim, const EdgeDifferentiableModel& surrogate,
                             const FeatureGraph& g, const AttackConfig& config);

struct RobustnessSummary {
  std::size_t attempts = 0;
  std::size_t successes = 0;
  double asr = 0.0;
  /// Mean of added / original edge count over successful attacks only.
  double apr = 0.0;
  bool apr_defined = false;
};

/// Throws InvalidInput on an empty list. Graphs without original edges use a
/// denominator of 1 for their perturbation ratio.
RobustnessSummary compute_asr_apr(const std::vector<AttackResult>& results);

// --- surrogate distillation ----------------------------------------------

enum class SurrogateArch { kMlpOnDegreeFeatures, kGnn2Mlp };
std::string_view surrogate_arch_name(SurrogateArch a);
SurrogateArch parse_surrogate_arch(std::string_view name);

struct SurrogateParams {
  SurrogateArch arch = SurrogateArch::kGnn2Mlp;
  std::vector<Matrix> gnn;  // two propagation layers for kGnn2Mlp, empty otherwise
  Matrix w1, b1, w2, b2;    // perceptron: input -> hidden (ReLU) -> 2 logits
};

class SurrogateModel final : public EdgeDifferentiableModel {
 public:
  explicit SurrogateModel(SurrogateParams params) : params_(std::move(params)) {}
  double margin(const FeatureGraph& g, const Matrix& adjacency, Matrix* gradient) const override;
  Label label(const FeatureGraph& g) const override;
  const SurrogateParams& params() const { return params_; }

 private:
  SurrogateParams params_;
};

struct SurrogateOptions {
  SurrogateArch arch = SurrogateArch::kGnn2Mlp;
  std::size_t hidden = 32;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  std::uint64_t rng_seed = 0;
};

struct DistillResult {
  SurrogateModel surrogate;
  /// Fraction of training graphs on which surrogate and victim agree.
  double agreement = 0.0;
};

/// Fits a surrogate to the victim's labels with cross-entropy. When the victim
/// gives every training graph the same label, the surrogate is set to always
/// answer that label.
DistillResult distill_surrogate(const LabelOracle& victim,
                                const std::vector<FeatureGraph>& train_graphs,
                                const SurrogateOptions& options);

}  // namespace graphmask
