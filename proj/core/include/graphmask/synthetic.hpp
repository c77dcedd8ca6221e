#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "graphmask/graph.hpp"

namespace graphmask {

/// Planted-motif benchmark: benign graphs are random call graphs, malicious
/// graphs additionally embed a small connected motif whose rows all carry a
/// fixed feature signature.
struct SyntheticConfig {
  std::size_t n_graphs = 1000;
  std::size_t min_nodes = 10;
  std::size_t max_nodes = 24;
  std::size_t motif_node_count = 4;
  /// Bit-string of length schema.width(); empty selects default_signature().
  std::string motif_signature;
  double malicious_fraction = 0.1;
  double background_edge_prob = 0.08;
  /// Per-bit density of the opcode / permission blocks of archetype rows and
  /// of the free opcode bits of motif rows.
  double opcode_density = 0.3;
  double permission_density = 0.05;
  /// Background rows are noisy copies of a small pool of function archetypes.
  /// Each graph draws `archetypes_per_graph` of them; a tree child keeps its
  /// parent's archetype with probability `archetype_inherit_prob`, and every
  /// bit is then flipped with probability `feature_noise`.
  std::size_t archetype_count = 12;
  std::size_t archetypes_per_graph = 2;
  double archetype_inherit_prob = 0.8;
  double feature_noise = 0.05;
  std::uint64_t rng_seed = 42;
  FeatureSchema schema;

  void validate() const;
  /// Signature as a 0/1 row vector, resolving the default.
  Matrix signature_row() const;
};

/// Three opcode bits and two permission bits spread across each block.
std::string default_signature(const FeatureSchema& schema);

/// True when every bit set in `signature` is also set in row `r` of `features`.
bool row_carries_signature(const Matrix& features, Eigen::Index r, const Matrix& signature);

std::vector<FeatureGraph> generate_synthetic_dataset(const SyntheticConfig& config);

}  // namespace graphmask
