#include "graphmask/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "graphmask/error.hpp"
#include "graphmask/optimizer.hpp"

namespace graphmask {

void AttackConfig::validate() const {
  if (max_iterations < 1) throw InvalidInput("max_iterations must be >= 1");
  if (ig_steps < 1) throw InvalidInput("ig_steps must be >= 1");
  if (edges_per_iteration < 1) throw InvalidInput("edges_per_iteration must be >= 1");
}

double DetectorModel::margin(const FeatureGraph& g, const Matrix& adjacency,
                             Matrix* gradient) const {
  ad::Tape tape;
  const BoundParams bound = bind(tape, params_, false);
  const ad::Var a = tape.leaf(adjacency, gradient != nullptr);
  const Propagation prop = Propagation::relaxed(tape, a);
  const ad::Var h = encode(tape, prop, tape.constant(g.features), bound);
  const ScoreVars scores = class_scores(tape, readout(tape, h), bound);
  const ad::Var f = tape.sub(scores.benign, scores.malicious);
  if (gradient) *gradient = tape.backward(f)[a];
  return tape.scalar(f);
}

Label DetectorModel::label(const FeatureGraph& g) const { return predict(g, params_).label; }

std::vector<Edge> candidate_edges(const FeatureGraph& g) {
  const std::set<Edge> present(g.edges.begin(), g.edges.end());
  std::vector<Edge> out;
  for (NodeId u = 0; u < g.node_count; ++u) {
    for (NodeId v = 0; v < g.node_count; ++v) {
      if (u != v && !present.count({u, v})) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<EdgeScore> edge_saliency_ig(const EdgeDifferentiableModel& model,
                                        const FeatureGraph& g, std::size_t ig_steps) {
  if (ig_steps < 1) throw InvalidInput("ig_steps must be >= 1");
  const auto candidates = candidate_edges(g);
  if (candidates.empty()) {
    throw InvalidInput("graph '" + g.graph_id + "' is complete; no edge can be added");
  }
  const Matrix base = dense_adjacency(g);
  Matrix direction = Matrix::Zero(base.rows(), base.cols());
  for (const auto& [u, v] : candidates) {
    direction(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
  }
  Matrix total = Matrix::Zero(base.rows(), base.cols());
  Matrix grad;
  const auto m = static_cast<double>(ig_steps);
  for (std::size_t k = 1; k <= ig_steps; ++k) {
    model.margin(g, base + (static_cast<double>(k) / m) * direction, &grad);
    total += grad;
  }
  std::vector<EdgeScore> scores;
  scores.reserve(candidates.size());
  for (const auto& e : candidates) {
    scores.push_back(
        {e, total(static_cast<Eigen::Index>(e.first), static_cast<Eigen::Index>(e.second)) / m});
  }
  return scores;
}

namespace {

AttackResult run_attack(const LabelOracle& victim, const EdgeDifferentiableModel& guide,
                        const FeatureGraph& g, const AttackConfig& config) {
  config.validate();
  AttackResult result;
  result.original_id = g.graph_id;
  result.original_edge_count = g.edges.size();
  result.perturbed = g;

  ++result.queries;
  if (victim(g) != Label::kMalicious) {
    throw InvalidInput("graph '" + g.graph_id + "' is not detected as malicious; nothing to evade");
  }

  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    if (candidate_edges(result.perturbed).empty()) break;
    auto scores = edge_saliency_ig(guide, result.perturbed, config.ig_steps);
    // Scores arrive in lexicographic edge order; a stable sort keeps that as
    // the tie-break.
    std::stable_sort(scores.begin(), scores.end(),
                     [](const EdgeScore& a, const EdgeScore& b) { return a.score > b.score; });
    const std::size_t take = std::min(config.edges_per_iteration, scores.size());
    for (std::size_t k = 0; k < take; ++k) {
      result.perturbed.edges.push_back(scores[k].edge);
      result.edges_added.push_back(scores[k].edge);
    }
    result.iterations_used = it;
    ++result.queries;
    if (victim(result.perturbed) == Label::kBenign) {
      result.success = true;
      break;
    }
  }
  return result;
}

}  // namespace

AttackResult whitebox_attack(const EdgeDifferentiableModel& victim, const FeatureGraph& g,
                             const AttackConfig& config) {
  return run_attack([&victim](const FeatureGraph& x) { return victim.label(x); }, victim, g,
                    config);
}

AttackResult blackbox_attack(const LabelOracle& victim, const EdgeDifferentiableModel& surrogate,
                             const FeatureGraph& g, const AttackConfig& config) {
  return run_attack(victim, surrogate, g, config);
}

RobustnessSummary compute_asr_apr(const std::vector<AttackResult>& results) {
  if (results.empty()) throw InvalidInput("no attack results to summarize");
  RobustnessSummary s;
  s.attempts = results.size();
  double ratio_sum = 0.0;
  for (const auto& r : results) {
    if (!r.success) continue;
    ++s.successes;
    ratio_sum += static_cast<double>(r.edges_added.size()) /
                 static_cast<double>(std::max<std::size_t>(r.original_edge_count, 1));
  }
  s.asr = static_cast<double>(s.successes) / static_cast<double>(s.attempts);
  s.apr_defined = s.successes > 0;
  s.apr = s.apr_defined ? ratio_sum / static_cast<double>(s.successes) : 0.0;
  return s;
}

// --- surrogates ------------------------------------------------------------

std::string_view surrogate_arch_name(SurrogateArch a) {
  return a == SurrogateArch::kGnn2Mlp ? "gnn2_mlp" : "mlp_on_degree_features";
}

SurrogateArch parse_surrogate_arch(std::string_view name) {
  if (name == "gnn2_mlp") return SurrogateArch::kGnn2Mlp;
  if (name == "mlp_on_degree_features") return SurrogateArch::kMlpOnDegreeFeatures;
  throw InvalidInput("unknown surrogate architecture '" + std::string(name) +
                     "' (expected gnn2_mlp or mlp_on_degree_features)");
}

namespace {

struct BoundSurrogate {
  std::vector<ad::Var> gnn;
  ad::Var w1, b1, w2, b2;
};

BoundSurrogate bind_surrogate(ad::Tape& tape, const SurrogateParams& p, bool trainable) {
  BoundSurrogate b;
  for (const auto& w : p.gnn) b.gnn.push_back(tape.leaf(w, trainable));
  b.w1 = tape.leaf(p.w1, trainable);
  b.b1 = tape.leaf(p.b1, trainable);
  b.w2 = tape.leaf(p.w2, trainable);
  b.b2 = tape.leaf(p.b2, trainable);
  return b;
}

std::vector<Matrix*> surrogate_tensors(SurrogateParams& p) {
  std::vector<Matrix*> out;
  for (auto& w : p.gnn) out.push_back(&w);
  for (Matrix* m : {&p.w1, &p.b1, &p.w2, &p.b2}) out.push_back(m);
  return out;
}

/// `adjacency` set: differentiable dense path; unset: constant graph edges.
ad::Var surrogate_logits(ad::Tape& tape, const SurrogateParams& p, const BoundSurrogate& b,
                         const FeatureGraph& g, std::optional<ad::Var> adjacency) {
  const ad::Var x = tape.constant(g.features);
  ad::Var features;
  if (p.arch == SurrogateArch::kGnn2Mlp) {
    const Propagation prop =
        adjacency ? Propagation::relaxed(tape, *adjacency) : Propagation::from_graph(g);
    ad::Var h = x;
    for (const auto& w : b.gnn) h = tape.relu(tape.matmul(prop.apply(tape, h), w));
    features = tape.mean_rows(h);
  } else {
    const ad::Var a = adjacency ? *adjacency : tape.constant(dense_adjacency(g));
    const ad::Var out_deg = tape.row_sum(a);
    const ad::Var in_deg = tape.row_sum(tape.transpose(a));
    features = tape.concat_cols(
        tape.concat_cols(tape.mean_rows(x), tape.mean_rows(tape.scale_rows(x, in_deg))),
        tape.concat_cols(tape.mean_rows(tape.scale_rows(x, out_deg)), tape.mean(out_deg)));
  }
  const ad::Var hidden = tape.relu(tape.add_row_broadcast(tape.matmul(features, b.w1), b.b1));
  return tape.add_row_broadcast(tape.matmul(hidden, b.w2), b.b2);
}

std::size_t surrogate_input_width(SurrogateArch arch, std::size_t d, std::size_t hidden) {
  return arch == SurrogateArch::kGnn2Mlp ? hidden : 3 * d + 1;
}

Matrix glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  return w;
}

}  // namespace

double SurrogateModel::margin(const FeatureGraph& g, const Matrix& adjacency,
                              Matrix* gradient) const {
  ad::Tape tape;
  const auto b = bind_surrogate(tape, params_, false);
  const ad::Var a = tape.leaf(adjacency, gradient != nullptr);
  const ad::Var logits = surrogate_logits(tape, params_, b, g, a);
  const ad::Var column = tape.transpose(logits);
  const std::size_t rows[2] = {0, 1};
  const ad::Var f = tape.sub(tape.gather_rows(column, std::span(rows, 1)),
                             tape.gather_rows(column, std::span(rows + 1, 1)));
  if (gradient) *gradient = tape.backward(f)[a];
  return tape.scalar(f);
}

Label SurrogateModel::label(const FeatureGraph& g) const {
  ad::Tape tape;
  const auto b = bind_surrogate(tape, params_, false);
  const Matrix& logits = tape.value(surrogate_logits(tape, params_, b, g, std::nullopt));
  return decide(logits(0, 0), logits(0, 1));
}

DistillResult distill_surrogate(const LabelOracle& victim,
                                const std::vector<FeatureGraph>& train_graphs,
                                const SurrogateOptions& options) {
  if (train_graphs.empty()) throw InvalidInput("surrogate distillation needs training graphs");
  if (options.hidden < 1 || options.batch_size < 1) {
    throw InvalidInput("surrogate hidden width and batch size must be >= 1");
  }
  const std::size_t d = train_graphs.front().feature_width();
  std::vector<Label> targets;
  targets.reserve(train_graphs.size());
  for (const auto& g : train_graphs) {
    if (g.feature_width() != d) throw InvalidInput("surrogate training graphs differ in width");
    targets.push_back(victim(g));
  }

  std::mt19937_64 rng(options.rng_seed);
  SurrogateParams p;
  p.arch = options.arch;
  if (p.arch == SurrogateArch::kGnn2Mlp) {
    p.gnn.push_back(glorot(d, options.hidden, rng));
    p.gnn.push_back(glorot(options.hidden, options.hidden, rng));
  }
  p.w1 = glorot(surrogate_input_width(p.arch, d, options.hidden), options.hidden, rng);
  p.b1 = Matrix::Zero(1, static_cast<Eigen::Index>(options.hidden));
  p.w2 = glorot(options.hidden, 2, rng);
  p.b2 = Matrix::Zero(1, 2);

  const bool single_class =
      std::all_of(targets.begin(), targets.end(), [&](Label l) { return l == targets.front(); });
  if (single_class) {
    // Constant answer: no gradient signal would separate anything anyway.
    p.w2.setZero();
    p.b2(0, to_int(targets.front())) = 1.0;
    p.b2(0, 1 - to_int(targets.front())) = -1.0;
  } else {
    Adam adam(AdamOptions{.learning_rate = options.learning_rate});
    auto params = surrogate_tensors(p);
    std::vector<std::size_t> order(train_graphs.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
        const std::size_t end = std::min(order.size(), begin + options.batch_size);
        std::vector<Matrix> acc;
        for (const Matrix* m : params) acc.push_back(Matrix::Zero(m->rows(), m->cols()));
        for (std::size_t k = begin; k < end; ++k) {
          const FeatureGraph& g = train_graphs[order[k]];
          ad::Tape tape;
          const auto b = bind_surrogate(tape, p, true);
          const ad::Var loss = tape.softmax_cross_entropy(
              surrogate_logits(tape, p, b, g, std::nullopt),
              static_cast<std::size_t>(to_int(targets[order[k]])));
          const auto grads = tape.backward(loss);
          std::size_t i = 0;
          for (const auto& w : b.gnn) acc[i++] += grads[w];
          for (const ad::Var v : {b.w1, b.b1, b.w2, b.b2}) acc[i++] += grads[v];
        }
        std::vector<const Matrix*> grad_ptrs;
        for (auto& m : acc) {
          m /= static_cast<double>(end - begin);
          grad_ptrs.push_back(&m);
        }
        adam.step(params, grad_ptrs);
      }
    }
  }

  DistillResult result{SurrogateModel(std::move(p)), 0.0};
  std::size_t agree = 0;
  for (std::size_t i = 0; i < train_graphs.size(); ++i) {
    if (result.surrogate.label(train_graphs[i]) == targets[i]) ++agree;
  }
  result.agreement = static_cast<double>(agree) / static_cast<double>(train_graphs.size());
  return result;
}

}  // namespace graphmask
