#include "graphmask/graph.hpp"

#include <algorithm>
#include <set>

#include "graphmask/error.hpp"

namespace graphmask {

Label label_from_int(int v) {
  if (v == 0) return Label::kBenign;
  if (v == 1) return Label::kMalicious;
  throw InvalidInput("label must be 0 or 1, got " + std::to_string(v));
}

void FeatureSchema::validate() const {
  if (opcode_dim < 1 || permission_dim < 1) {
    throw InvalidInput("feature schema needs opcode_dim >= 1 and permission_dim >= 1");
  }
}

void FeatureGraph::validate() const {
  const std::string where = "graph '" + graph_id + "': ";
  if (static_cast<std::size_t>(features.rows()) != node_count) {
    throw InvalidInput(where + "feature rows (" + std::to_string(features.rows()) +
                       ") != node count (" + std::to_string(node_count) + ")");
  }
  std::set<Edge> seen;
  for (const auto& [src, dst] : edges) {
    if (src >= node_count || dst >= node_count) {
      throw InvalidInput(where + "edge (" + std::to_string(src) + "," + std::to_string(dst) +
                         ") out of range for " + std::to_string(node_count) + " nodes");
    }
    if (src == dst) throw InvalidInput(where + "self-loop on node " + std::to_string(src));
    if (!seen.insert({src, dst}).second) {
      throw InvalidInput(where + "duplicate edge (" + std::to_string(src) + "," +
                         std::to_string(dst) + ")");
    }
  }
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    const double v = features.data()[i];
    if (v != 0.0 && v != 1.0) throw InvalidInput(where + "feature entries must be 0 or 1");
  }
}

bool FeatureGraph::has_edge(NodeId src, NodeId dst) const {
  return std::find(edges.begin(), edges.end(), Edge{src, dst}) != edges.end();
}

bool FeatureGraph::operator==(const FeatureGraph& other) const {
  return graph_id == other.graph_id && node_count == other.node_count && edges == other.edges &&
         label == other.label && year_tag == other.year_tag &&
         features.rows() == other.features.rows() && features.cols() == other.features.cols() &&
         features == other.features;
}

std::vector<std::vector<NodeId>> symmetric_neighbors(const FeatureGraph& g) {
  std::vector<std::vector<NodeId>> nbrs(g.node_count);
  for (const auto& [src, dst] : g.edges) {
    nbrs[src].push_back(dst);
    nbrs[dst].push_back(src);
  }
  for (auto& list : nbrs) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nbrs;
}

Matrix dense_adjacency(const FeatureGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count);
  Matrix a = Matrix::Zero(n, n);
  for (const auto& [src, dst] : g.edges) {
    a(static_cast<Eigen::Index>(src), static_cast<Eigen::Index>(dst)) = 1.0;
  }
  return a;
}

}  // namespace graphmask
