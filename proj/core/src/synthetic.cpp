#include "graphmask/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "graphmask/error.hpp"

namespace graphmask {

std::string default_signature(const FeatureSchema& schema) {
  std::string bits(schema.width(), '0');
  const std::size_t op = schema.opcode_dim;
  const std::size_t perm = schema.permission_dim;
  for (std::size_t k : {std::size_t{0}, op / 3, (2 * op) / 3}) bits[k] = '1';
  for (std::size_t k : {perm / 4, (3 * perm) / 4}) bits[op + k] = '1';
  return bits;
}

void SyntheticConfig::validate() const {
  schema.validate();
  if (n_graphs < 1) throw InvalidInput("n_graphs must be >= 1");
  if (!(malicious_fraction > 0.0 && malicious_fraction < 1.0)) {
    throw InvalidInput("malicious_fraction must lie in (0,1), got " +
                       std::to_string(malicious_fraction));
  }
  if (min_nodes < 1 || min_nodes > max_nodes) {
    throw InvalidInput("node range must satisfy 1 <= min_nodes <= max_nodes");
  }
  if (motif_node_count < 2) throw InvalidInput("motif_node_count must be >= 2");
  if (motif_node_count > min_nodes) {
    throw InvalidInput("motif_node_count (" + std::to_string(motif_node_count) +
                       ") exceeds min_nodes (" + std::to_string(min_nodes) + ")");
  }
  if (motif_node_count + 1 > max_nodes) {
    throw InvalidInput("max_nodes must leave room for at least one background node");
  }
  if (!(background_edge_prob >= 0.0 && background_edge_prob <= 1.0)) {
    throw InvalidInput("background_edge_prob must lie in [0,1]");
  }
  if (!(opcode_density >= 0.0 && opcode_density < 1.0) ||
      !(permission_density >= 0.0 && permission_density < 1.0)) {
    throw InvalidInput("feature densities must lie in [0,1)");
  }
  if (archetype_count < 1 || archetypes_per_graph < 1 || archetypes_per_graph > archetype_count) {
    throw InvalidInput("archetypes_per_graph must lie in [1, archetype_count]");
  }
  if (!(archetype_inherit_prob >= 0.0 && archetype_inherit_prob <= 1.0)) {
    throw InvalidInput("archetype_inherit_prob must lie in [0,1]");
  }
  if (!(feature_noise >= 0.0 && feature_noise < 0.5)) {
    throw InvalidInput("feature_noise must lie in [0,0.5)");
  }
  if (!motif_signature.empty()) {
    if (motif_signature.size() != schema.width()) {
      throw InvalidInput("motif_signature length must equal opcode_dim + permission_dim");
    }
    if (motif_signature.find_first_not_of("01") != std::string::npos ||
        motif_signature.find('1') == std::string::npos) {
      throw InvalidInput("motif_signature must be a 0/1 string with at least one 1");
    }
  }
}

Matrix SyntheticConfig::signature_row() const {
  const std::string bits = motif_signature.empty() ? default_signature(schema) : motif_signature;
  Matrix row = Matrix::Zero(1, static_cast<Eigen::Index>(bits.size()));
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] == '1') row(0, static_cast<Eigen::Index>(j)) = 1.0;
  }
  return row;
}

bool row_carries_signature(const Matrix& features, Eigen::Index r, const Matrix& signature) {
  for (Eigen::Index j = 0; j < signature.cols(); ++j) {
    if (signature(0, j) != 0.0 && features(r, j) == 0.0) return false;
  }
  return true;
}

namespace {

class Generator {
 public:
  explicit Generator(const SyntheticConfig& cfg)
      : cfg_(cfg), rng_(cfg.rng_seed), signature_(cfg.signature_row()) {
    archetypes_.resize(static_cast<Eigen::Index>(cfg.archetype_count), signature_.cols());
    for (Eigen::Index a = 0; a < archetypes_.rows(); ++a) random_row(archetypes_, a);
  }

  FeatureGraph make(std::size_t index, bool malicious) {
    const std::size_t m = cfg_.motif_node_count;
    const std::size_t lo = malicious ? std::max(cfg_.min_nodes, m + 1) : cfg_.min_nodes;
    const std::size_t n = uniform_size(lo, cfg_.max_nodes);
    const std::size_t background = malicious ? n - m : n;

    std::vector<std::size_t> pool(cfg_.archetype_count);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng_);
    pool.resize(cfg_.archetypes_per_graph);

    Matrix x(static_cast<Eigen::Index>(n), signature_.cols());
    std::vector<std::size_t> kind(background);
    std::bernoulli_distribution inherit(cfg_.archetype_inherit_prob);
    std::set<Edge> edges;
    // Random recursive tree keeps the background weakly connected.
    for (std::size_t v = 0; v < background; ++v) {
      const std::size_t own = pool[uniform_size(0, pool.size() - 1)];
      if (v == 0) {
        kind[v] = own;
      } else {
        const std::size_t parent = uniform_size(0, v - 1);
        edges.emplace(parent, v);
        kind[v] = inherit(rng_) ? kind[parent] : own;
      }
      background_row(x, static_cast<Eigen::Index>(v), kind[v]);
    }
    std::bernoulli_distribution extra(cfg_.background_edge_prob);
    for (std::size_t u = 0; u < background; ++u) {
      for (std::size_t v = 0; v < background; ++v) {
        if (u != v && extra(rng_)) edges.emplace(u, v);
      }
    }

    if (malicious) {
      std::bernoulli_distribution op_bit(cfg_.opcode_density);
      for (std::size_t k = 0; k < m; ++k) {
        const auto r = static_cast<Eigen::Index>(background + k);
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
          const bool in_opcodes = static_cast<std::size_t>(j) < cfg_.schema.opcode_dim;
          x(r, j) = (signature_(0, j) != 0.0 || (in_opcodes && op_bit(rng_))) ? 1.0 : 0.0;
        }
        edges.emplace(background + k, background + (k + 1) % m);
      }
      edges.emplace(uniform_size(0, background - 1), background + uniform_size(0, m - 1));
      edges.emplace(background + uniform_size(0, m - 1), uniform_size(0, background - 1));
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng_);

    FeatureGraph g;
    g.graph_id = make_id(index);
    g.node_count = n;
    g.label = malicious ? Label::kMalicious : Label::kBenign;
    g.features.resize(x.rows(), x.cols());
    for (std::size_t v = 0; v < n; ++v) {
      g.features.row(static_cast<Eigen::Index>(perm[v])) = x.row(static_cast<Eigen::Index>(v));
    }
    for (const auto& [s, d] : edges) g.edges.emplace_back(perm[s], perm[d]);
    std::sort(g.edges.begin(), g.edges.end());
    return g;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::size_t uniform_size(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  void random_row(Matrix& x, Eigen::Index r) {
    std::bernoulli_distribution op_bit(cfg_.opcode_density);
    std::bernoulli_distribution perm_bit(cfg_.permission_density);
    do {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const bool in_opcodes = static_cast<std::size_t>(j) < cfg_.schema.opcode_dim;
        x(r, j) = (in_opcodes ? op_bit(rng_) : perm_bit(rng_)) ? 1.0 : 0.0;
      }
    } while (row_carries_signature(x, r, signature_));
  }

  void background_row(Matrix& x, Eigen::Index r, std::size_t archetype) {
    std::bernoulli_distribution flip(cfg_.feature_noise);
    const auto a = static_cast<Eigen::Index>(archetype);
    do {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        x(r, j) = flip(rng_) ? 1.0 - archetypes_(a, j) : archetypes_(a, j);
      }
    } while (row_carries_signature(x, r, signature_));
  }

  static std::string make_id(std::size_t index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
    return "syn-" + digits;
  }

  const SyntheticConfig& cfg_;
  std::mt19937_64 rng_;
  Matrix signature_;
  Matrix archetypes_;
};

}  // namespace

std::vector<FeatureGraph> generate_synthetic_dataset(const SyntheticConfig& config) {
  config.validate();
  Generator gen(config);

  const auto n_malicious = static_cast<std::size_t>(
      std::llround(config.malicious_fraction * static_cast<double>(config.n_graphs)));
  std::vector<std::size_t> order(config.n_graphs);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), gen.rng());
  std::vector<bool> malicious(config.n_graphs, false);
  for (std::size_t k = 0; k < n_malicious && k < order.size(); ++k) malicious[order[k]] = true;

  std::vector<FeatureGraph> graphs;
  graphs.reserve(config.n_graphs);
  for (std::size_t i = 0; i < config.n_graphs; ++i) graphs.push_back(gen.make(i, malicious[i]));
  return graphs;
}

}  // namespace graphmask
