#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphmask/tensor.hpp"

namespace graphmask {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

enum class Label : int { kBenign = 0, kMalicious = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }
Label label_from_int(int v);

/// Widths of the two multi-hot blocks making up a node feature row.
struct FeatureSchema {
  std::size_t opcode_dim = 24;
  std::size_t permission_dim = 16;

  std::size_t width() const { return opcode_dim + permission_dim; }
  void validate() const;
  bool operator==(const FeatureSchema&) const = default;
};

/// Directed call graph with binary node features and a class label.
struct FeatureGraph {
  std::string graph_id;
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  Matrix features;  // node_count x d, entries in {0,1}
  Label label = Label::kBenign;
  std::optional<int> year_tag;

  std::size_t feature_width() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws InvalidInput naming the graph when an invariant is broken:
  /// endpoint out of range, self-loop, duplicate edge, non-binary feature,
  /// or a feature matrix whose row count differs from node_count.
  void validate() const;

  bool has_edge(NodeId src, NodeId dst) const;
  bool operator==(const FeatureGraph& other) const;
};

/// Undirected neighbor lists over the symmetrized edge set (u~v iff u->v or v->u).
std::vector<std::vector<NodeId>> symmetric_neighbors(const FeatureGraph& g);

/// Dense 0/1 adjacency, A(src, dst) = 1 for every directed edge.
Matrix dense_adjacency(const FeatureGraph& g);

}  // namespace graphmask
