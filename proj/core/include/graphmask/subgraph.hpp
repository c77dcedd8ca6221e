#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "graphmask/graph.hpp"

namespace graphmask {

struct BehaviorSubgraph {
  FeatureGraph graph;
  /// Original node id -> id in `graph`. Nodes are renumbered in ascending
  /// order of their original id.
  std::map<NodeId, NodeId> old_to_new;
};

/// Union of out-edge BFS balls of radius `depth` around each seed, with every
/// original edge whose endpoints both survive. Throws InvalidInput on an empty
/// seed list or an out-of-range seed.
BehaviorSubgraph extract_behavior_subgraph(const FeatureGraph& fcg,
                                           const std::vector<NodeId>& seeds, std::size_t depth);

}  // namespace graphmask
