#include "graphmask/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphmask/error.hpp"

namespace graphmask {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kMinusC: return "minus_c";
    case Variant::kMinusR: return "minus_r";
    case Variant::kMinusCR: return "minus_cr";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "full") return Variant::kFull;
  if (name == "minus_c") return Variant::kMinusC;
  if (name == "minus_r") return Variant::kMinusR;
  if (name == "minus_cr") return Variant::kMinusCR;
  throw InvalidInput("unknown variant '" + std::string(name) +
                     "' (expected full, minus_c, minus_r or minus_cr)");
}

namespace {

bool shape_is(const Matrix& m, Eigen::Index r, Eigen::Index c) {
  return m.rows() == r && m.cols() == c;
}

Matrix glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  return w;
}

Matrix small_normal(std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix v(1, static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = 0.01 * dist(rng);
  return v;
}

}  // namespace

void ModelParams::validate() const {
  schema.validate();
  const auto d = static_cast<Eigen::Index>(schema.width());
  const auto h = static_cast<Eigen::Index>(hidden);
  if (hidden < 1) throw InvalidInput("hidden width must be >= 1");
  if (encoder.empty() || encoder.size() != decoder.size()) {
    throw InvalidInput("encoder and decoder must have the same nonzero layer count");
  }
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    if (!shape_is(encoder[l], l == 0 ? d : h, h)) {
      throw InvalidInput("encoder." + std::to_string(l) + " has the wrong shape");
    }
    const bool last = l + 1 == decoder.size();
    if (!shape_is(decoder[l], h, last ? d : h)) {
      throw InvalidInput("decoder." + std::to_string(l) + " has the wrong shape");
    }
  }
  if (!shape_is(mask_token, 1, d)) throw InvalidInput("mask_token must be 1 x d");
  if (!shape_is(proxy_benign, 1, h) || !shape_is(proxy_malicious, 1, h)) {
    throw InvalidInput("proxies must be 1 x h");
  }
  if (uses_proxies(variant) == head.has_value()) {
    throw InvalidInput("perceptron head must be present exactly for minus_c / minus_cr");
  }
  if (head && (!shape_is(head->w1, h, h) || !shape_is(head->b1, 1, h) ||
               !shape_is(head->w2, h, 2) || !shape_is(head->b2, 1, 2))) {
    throw InvalidInput("perceptron head has the wrong shape");
  }
  for_each_tensor([](const std::string& name, const Matrix& m) {
    if (!m.allFinite()) throw InvalidInput("parameter " + name + " is not finite");
  });
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (schema != other.schema || hidden != other.hidden || variant != other.variant ||
      encoder.size() != other.encoder.size() || head.has_value() != other.head.has_value()) {
    return false;
  }
  std::vector<const Matrix*> mine, theirs;
  for_each_tensor([&](const std::string&, const Matrix& m) { mine.push_back(&m); });
  other.for_each_tensor([&](const std::string&, const Matrix& m) { theirs.push_back(&m); });
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (!shape_is(*mine[i], theirs[i]->rows(), theirs[i]->cols()) || *mine[i] != *theirs[i]) {
      return false;
    }
  }
  return true;
}

ModelParams init_params(const FeatureSchema& schema, std::size_t hidden, std::size_t layers,
                        std::uint64_t rng_seed, Variant variant) {
  schema.validate();
  if (hidden < 1) throw InvalidInput("hidden width must be >= 1");
  if (layers < 1) throw InvalidInput("layer count must be >= 1");
  std::mt19937_64 rng(rng_seed);
  ModelParams p;
  p.schema = schema;
  p.hidden = hidden;
  p.variant = variant;
  const std::size_t d = schema.width();
  for (std::size_t l = 0; l < layers; ++l) p.encoder.push_back(glorot(l == 0 ? d : hidden, hidden, rng));
  for (std::size_t l = 0; l < layers; ++l) {
    p.decoder.push_back(glorot(hidden, l + 1 == layers ? d : hidden, rng));
  }
  p.mask_token = small_normal(d, rng);
  p.proxy_benign = small_normal(hidden, rng);
  p.proxy_malicious = small_normal(hidden, rng);
  if (!uses_proxies(variant)) {
    MlpHead head;
    head.w1 = glorot(hidden, hidden, rng);
    head.b1 = Matrix::Zero(1, static_cast<Eigen::Index>(hidden));
    head.w2 = glorot(hidden, 2, rng);
    head.b2 = Matrix::Zero(1, 2);
    p.head = std::move(head);
  }
  return p;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  z.for_each_tensor([](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

std::size_t masked_count(std::size_t node_count, double gamma) {
  if (node_count < 2) throw InvalidInput("masking needs at least 2 nodes");
  const auto raw = static_cast<long long>(std::llround(gamma * static_cast<double>(node_count)));
  return static_cast<std::size_t>(
      std::clamp<long long>(raw, 1, static_cast<long long>(node_count) - 1));
}

MaskPlan sample_mask(std::size_t node_count, double gamma, std::mt19937_64& rng) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("mask rate must lie in (0,1)");
  const std::size_t k = masked_count(node_count, gamma);
  std::vector<std::size_t> idx(node_count);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, node_count - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  ++forward_counters().mask_samples;
  return MaskPlan{std::move(idx), gamma};
}

ForwardCounters& forward_counters() {
  static ForwardCounters counters;
  return counters;
}

std::shared_ptr<const SparseMatrix> propagation_matrix(const FeatureGraph& g) {
  const auto nbrs = symmetric_neighbors(g);
  std::vector<SparseMatrix::Entry> entries;
  entries.reserve(g.node_count + 2 * g.edges.size());
  for (NodeId v = 0; v < g.node_count; ++v) {
    entries.push_back({v, v, 1.0});
    const auto dv = static_cast<double>(nbrs[v].size());
    for (NodeId u : nbrs[v]) {
      const auto du = static_cast<double>(nbrs[u].size());
      entries.push_back({v, u, 1.0 / std::sqrt(du * dv)});
    }
  }
  return std::make_shared<const SparseMatrix>(g.node_count, g.node_count, std::move(entries));
}

Propagation Propagation::from_graph(const FeatureGraph& g) {
  Propagation p;
  p.sparse_ = propagation_matrix(g);
  p.node_count_ = g.node_count;
  return p;
}

Propagation Propagation::relaxed(ad::Tape& tape, ad::Var adjacency) {
  const auto n = tape.value(adjacency).rows();
  if (n != tape.value(adjacency).cols()) throw InvalidInput("adjacency must be square");
  ad::Var at = tape.transpose(adjacency);
  ad::Var sym = tape.sub(tape.add(adjacency, at), tape.mul(adjacency, at));
  ad::Var inv_sqrt_deg = tape.rsqrt_or_zero(tape.row_sum(sym));
  ad::Var normalized = tape.scale_cols(tape.scale_rows(sym, inv_sqrt_deg), inv_sqrt_deg);
  ad::Var eye = tape.constant(Matrix::Identity(n, n));
  Propagation p;
  p.dense_ = tape.add(normalized, eye);
  p.node_count_ = static_cast<std::size_t>(n);
  return p;
}

ad::Var Propagation::apply(ad::Tape& tape, ad::Var x) const {
  if (sparse_) return tape.spmm(sparse_, x);
  return tape.matmul(*dense_, x);
}

BoundParams bind(ad::Tape& tape, const ModelParams& params, bool trainable) {
  BoundParams b;
  b.variant = params.variant;
  for (const auto& w : params.encoder) b.encoder.push_back(tape.leaf(w, trainable));
  for (const auto& w : params.decoder) b.decoder.push_back(tape.leaf(w, trainable));
  b.mask_token = tape.leaf(params.mask_token, trainable);
  b.proxy_benign = tape.leaf(params.proxy_benign, trainable);
  b.proxy_malicious = tape.leaf(params.proxy_malicious, trainable);
  if (params.head) {
    b.head = BoundHead{tape.leaf(params.head->w1, trainable), tape.leaf(params.head->b1, trainable),
                       tape.leaf(params.head->w2, trainable), tape.leaf(params.head->b2, trainable)};
  }
  return b;
}

ModelParams collect_gradients(const ad::Gradients& grads, const BoundParams& bound,
                              const ModelParams& like) {
  ModelParams g = like;
  for (std::size_t l = 0; l < g.encoder.size(); ++l) g.encoder[l] = grads[bound.encoder[l]];
  for (std::size_t l = 0; l < g.decoder.size(); ++l) g.decoder[l] = grads[bound.decoder[l]];
  g.mask_token = grads[bound.mask_token];
  g.proxy_benign = grads[bound.proxy_benign];
  g.proxy_malicious = grads[bound.proxy_malicious];
  if (g.head) {
    g.head->w1 = grads[bound.head->w1];
    g.head->b1 = grads[bound.head->b1];
    g.head->w2 = grads[bound.head->w2];
    g.head->b2 = grads[bound.head->b2];
  }
  return g;
}

ad::Var apply_mask(ad::Tape& tape, ad::Var features, const MaskPlan& plan, ad::Var mask_token) {
  if (plan.empty()) return features;
  return tape.replace_rows(features, plan.masked, mask_token);
}

namespace {

ad::Var gnn_stack(ad::Tape& tape, const Propagation& prop, ad::Var x,
                  std::span<const ad::Var> weights, bool linear_last) {
  if (static_cast<std::size_t>(tape.value(x).rows()) != prop.node_count()) {
    throw InvalidInput("feature rows do not match the graph's node count");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    x = tape.matmul(prop.apply(tape, x), weights[l]);
    if (!(linear_last && l + 1 == weights.size())) x = tape.relu(x);
  }
  return x;
}

}  // namespace

ad::Var encode(ad::Tape& tape, const Propagation& prop, ad::Var features, const BoundParams& p) {
  ++forward_counters().encoder_passes;
  return gnn_stack(tape, prop, features, p.encoder, false);
}

ad::Var remask(ad::Tape& tape, ad::Var embeddings, const MaskPlan& plan) {
  if (plan.empty()) return embeddings;
  return tape.zero_rows(embeddings, plan.masked);
}

ad::Var decode(ad::Tape& tape, const Propagation& prop, ad::Var embeddings, const BoundParams& p) {
  ++forward_counters().decoder_passes;
  return gnn_stack(tape, prop, embeddings, p.decoder, true);
}

ad::Var readout(ad::Tape& tape, ad::Var embeddings) {
  if (tape.value(embeddings).rows() == 0) throw InvalidInput("readout of an empty graph");
  return tape.mean_rows(embeddings);
}

ad::Var head_logits(ad::Tape& tape, ad::Var g, const BoundHead& h) {
  ad::Var hidden = tape.relu(tape.add_row_broadcast(tape.matmul(g, h.w1), h.b1));
  return tape.add_row_broadcast(tape.matmul(hidden, h.w2), h.b2);
}

ScoreVars class_scores(ad::Tape& tape, ad::Var g, const BoundParams& p) {
  if (p.head) {
    ad::Var column = tape.transpose(head_logits(tape, g, *p.head));
    const std::size_t rows[2] = {0, 1};
    return {tape.gather_rows(column, std::span(rows, 1)),
            tape.gather_rows(column, std::span(rows + 1, 1))};
  }
  return {tape.cosine_rows(g, p.proxy_benign), tape.cosine_rows(g, p.proxy_malicious)};
}

Matrix encode(const FeatureGraph& g, const Matrix& features, const ModelParams& params) {
  ad::Tape tape;
  const auto b = bind(tape, params, false);
  return tape.value(encode(tape, Propagation::from_graph(g), tape.constant(features), b));
}

Matrix decode(const FeatureGraph& g, const Matrix& embeddings, const ModelParams& params) {
  ad::Tape tape;
  const auto b = bind(tape, params, false);
  return tape.value(decode(tape, Propagation::from_graph(g), tape.constant(embeddings), b));
}

Matrix readout(const Matrix& embeddings) {
  if (embeddings.rows() == 0) throw InvalidInput("readout of an empty graph");
  return embeddings.colwise().mean();
}

Label decide(double score_benign, double score_malicious) {
  return score_malicious >= score_benign ? Label::kMalicious : Label::kBenign;
}

Embedding embed(const FeatureGraph& g, const ModelParams& params) {
  if (g.node_count == 0) throw InvalidInput("cannot classify an empty graph");
  if (g.feature_width() != params.schema.width()) {
    throw InvalidInput("graph feature width " + std::to_string(g.feature_width()) +
                       " differs from model width " + std::to_string(params.schema.width()));
  }
  ad::Tape tape;
  const auto b = bind(tape, params, false);
  ad::Var h = encode(tape, Propagation::from_graph(g), tape.constant(g.features), b);
  ad::Var pooled = readout(tape, h);
  const auto scores = class_scores(tape, pooled, b);
  Embedding e;
  e.graph = tape.value(pooled);
  e.prediction.score_benign = tape.scalar(scores.benign);
  e.prediction.score_malicious = tape.scalar(scores.malicious);
  e.prediction.label = decide(e.prediction.score_benign, e.prediction.score_malicious);
  return e;
}

Prediction predict(const FeatureGraph& g, const ModelParams& params) {
  return embed(g, params).prediction;
}

}  // namespace graphmask
