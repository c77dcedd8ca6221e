#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphmask/autodiff.hpp"
#include "graphmask/graph.hpp"

namespace graphmask {

/// Which of the two training modules are active.
///   full      masked reconstruction + proxy contrastive classifier
///   minus_c   masked reconstruction + perceptron head (cross-entropy)
///   minus_r   no masking / reconstruction, proxy classifier
///   minus_cr  encoder + readout + perceptron head only
enum class Variant { kFull, kMinusC, kMinusR, kMinusCR };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
inline bool uses_reconstruction(Variant v) { return v == Variant::kFull || v == Variant::kMinusC; }
inline bool uses_proxies(Variant v) { return v == Variant::kFull || v == Variant::kMinusR; }

/// Two-layer perceptron on the graph embedding: h -> h (ReLU) -> 2 logits.
struct MlpHead {
  Matrix w1, b1, w2, b2;
};

struct ModelParams {
  FeatureSchema schema;
  std::size_t hidden = 128;
  Variant variant = Variant::kFull;
  std::vector<Matrix> encoder;  // (d x h), then (h x h) ...
  std::vector<Matrix> decoder;  // (h x h) ..., then (h x d)
  Matrix mask_token;            // 1 x d
  Matrix proxy_benign;          // 1 x h
  Matrix proxy_malicious;       // 1 x h
  std::optional<MlpHead> head;  // present for minus_c / minus_cr

  std::size_t layers() const { return encoder.size(); }
  /// Throws InvalidInput if the shape chain d -> h -> d is broken.
  void validate() const;

  /// Visits every learnable tensor in a fixed order with a stable name.
  template <typename F>
  void for_each_tensor(F&& fn) {
    visit(*this, fn);
  }
  template <typename F>
  void for_each_tensor(F&& fn) const {
    visit(*this, fn);
  }

  bool operator==(const ModelParams& other) const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& fn) {
    for (std::size_t l = 0; l < self.encoder.size(); ++l) fn("encoder." + std::to_string(l), self.encoder[l]);
    for (std::size_t l = 0; l < self.decoder.size(); ++l) fn("decoder." + std::to_string(l), self.decoder[l]);
    fn(std::string("mask_token"), self.mask_token);
    fn(std::string("proxy_benign"), self.proxy_benign);
    fn(std::string("proxy_malicious"), self.proxy_malicious);
    if (self.head) {
      fn(std::string("head.w1"), self.head->w1);
      fn(std::string("head.b1"), self.head->b1);
      fn(std::string("head.w2"), self.head->w2);
      fn(std::string("head.b2"), self.head->b2);
    }
  }
};

/// Glorot-uniform weights, 0.01-scaled normal mask token and proxies, zero
/// head biases. Deterministic in `rng_seed`.
ModelParams init_params(const FeatureSchema& schema, std::size_t hidden, std::size_t layers,
                        std::uint64_t rng_seed, Variant variant = Variant::kFull);

/// Same-shaped tensors, all zero.
ModelParams zeros_like(const ModelParams& p);

// --- masking -------------------------------------------------------------

struct MaskPlan {
  std::vector<std::size_t> masked;  // sorted, unique
  double gamma = 0.0;

  bool empty() const { return masked.empty(); }
};

/// clamp(round(gamma * n), 1, n - 1)
std::size_t masked_count(std::size_t node_count, double gamma);

/// Uniform sample without replacement. Requires n >= 2 and 0 < gamma < 1.
MaskPlan sample_mask(std::size_t node_count, double gamma, std::mt19937_64& rng);

/// Counters incremented by sample_mask and decode; used to verify which
/// modules an ablation variant actually runs.
struct ForwardCounters {
  std::atomic<std::uint64_t> mask_samples{0};
  std::atomic<std::uint64_t> encoder_passes{0};
  std::atomic<std::uint64_t> decoder_passes{0};
};
ForwardCounters& forward_counters();

// --- propagation ---------------------------------------------------------

/// I + D^{-1/2} S D^{-1/2} over the symmetrized edge set S; isolated nodes
/// keep only the identity term.
std::shared_ptr<const SparseMatrix> propagation_matrix(const FeatureGraph& g);

/// Graph operator applied at every layer. Either a constant sparse matrix for
/// a concrete graph, or a dense matrix recorded on the tape from a relaxed
/// (fractional) adjacency so that gradients reach the adjacency entries.
class Propagation {
 public:
  static Propagation from_graph(const FeatureGraph& g);
  /// Symmetrizes with A + A^T - A*A^T (elementwise), which is the logical OR
  /// on {0,1} entries, then normalizes by fractional degrees.
  static Propagation relaxed(ad::Tape& tape, ad::Var adjacency);

  ad::Var apply(ad::Tape& tape, ad::Var x) const;
  std::size_t node_count() const { return node_count_; }

 private:
  std::shared_ptr<const SparseMatrix> sparse_;
  std::optional<ad::Var> dense_;
  std::size_t node_count_ = 0;
};

// --- forward pieces on a tape --------------------------------------------

struct BoundHead {
  ad::Var w1, b1, w2, b2;
};

struct BoundParams {
  std::vector<ad::Var> encoder;
  std::vector<ad::Var> decoder;
  ad::Var mask_token;
  ad::Var proxy_benign;
  ad::Var proxy_malicious;
  std::optional<BoundHead> head;
  Variant variant = Variant::kFull;
};

BoundParams bind(ad::Tape& tape, const ModelParams& params, bool trainable);

/// Gradients of every bound tensor, arranged like `like`.
ModelParams collect_gradients(const ad::Gradients& grads, const BoundParams& bound,
                              const ModelParams& like);

ad::Var apply_mask(ad::Tape& tape, ad::Var features, const MaskPlan& plan, ad::Var mask_token);
/// ReLU after every layer.
ad::Var encode(ad::Tape& tape, const Propagation& prop, ad::Var features, const BoundParams& p);
ad::Var remask(ad::Tape& tape, ad::Var embeddings, const MaskPlan& plan);
/// ReLU after every layer but the last, which is linear.
ad::Var decode(ad::Tape& tape, const Propagation& prop, ad::Var embeddings, const BoundParams& p);
/// Mean over nodes.
ad::Var readout(ad::Tape& tape, ad::Var embeddings);

/// 1 x 2 logits (benign, malicious) of the perceptron head.
ad::Var head_logits(ad::Tape& tape, ad::Var graph_embedding, const BoundHead& head);

struct ScoreVars {
  ad::Var benign;
  ad::Var malicious;
};
/// Cosine similarity to each proxy, or the head's two logits for the
/// perceptron variants.
ScoreVars class_scores(ad::Tape& tape, ad::Var graph_embedding, const BoundParams& p);

// --- value-level convenience ----------------------------------------------

Matrix encode(const FeatureGraph& g, const Matrix& features, const ModelParams& params);
Matrix decode(const FeatureGraph& g, const Matrix& embeddings, const ModelParams& params);
Matrix readout(const Matrix& embeddings);

struct Prediction {
  Label label = Label::kMalicious;
  double score_benign = 0.0;
  double score_malicious = 0.0;
};

/// Ties go to malicious.
Label decide(double score_benign, double score_malicious);

/// Unmasked forward: encoder, readout, class scores.
Prediction predict(const FeatureGraph& g, const ModelParams& params);

/// Graph embedding plus both scores, as `predict` computes them.
struct Embedding {
  Matrix graph;  // 1 x h
  Prediction prediction;
};
Embedding embed(const FeatureGraph& g, const ModelParams& params);

}  // namespace graphmask
