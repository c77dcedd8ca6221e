#include "graphmask/subgraph.hpp"

#include <deque>

#include "graphmask/error.hpp"

namespace graphmask {

BehaviorSubgraph extract_behavior_subgraph(const FeatureGraph& fcg,
                                           const std::vector<NodeId>& seeds, std::size_t depth) {
  if (seeds.empty()) {
    throw InvalidInput("graph '" + fcg.graph_id + "' has no sensitive seed nodes");
  }
  std::vector<std::vector<NodeId>> out(fcg.node_count);
  for (const auto& [s, d] : fcg.edges) out[s].push_back(d);

  std::vector<bool> keep(fcg.node_count, false);
  std::vector<std::size_t> dist(fcg.node_count);
  for (NodeId seed : seeds) {
    if (seed >= fcg.node_count) {
      throw InvalidInput("seed " + std::to_string(seed) + " out of range for graph '" +
                         fcg.graph_id + "'");
    }
    // Fresh BFS per seed: each seed gets its own depth budget.
    std::vector<bool> visited(fcg.node_count, false);
    std::deque<NodeId> queue{seed};
    visited[seed] = true;
    dist[seed] = 0;
    while (!queue.empty()) {
      const NodeId u = queue.front();
      queue.pop_front();
      keep[u] = true;
      if (dist[u] == depth) continue;
      for (NodeId v : out[u]) {
        if (visited[v]) continue;
        visited[v] = true;
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }

  BehaviorSubgraph result;
  for (NodeId v = 0; v < fcg.node_count; ++v) {
    if (keep[v]) result.old_to_new.emplace(v, result.old_to_new.size());
  }
  auto& g = result.graph;
  g.graph_id = fcg.graph_id;
  g.label = fcg.label;
  g.year_tag = fcg.year_tag;
  g.node_count = result.old_to_new.size();
  g.features.resize(static_cast<Eigen::Index>(g.node_count), fcg.features.cols());
  for (const auto& [old_id, new_id] : result.old_to_new) {
    g.features.row(static_cast<Eigen::Index>(new_id)) =
        fcg.features.row(static_cast<Eigen::Index>(old_id));
  }
  for (const auto& [s, d] : fcg.edges) {
    if (keep[s] && keep[d]) g.edges.emplace_back(result.old_to_new.at(s), result.old_to_new.at(d));
  }
  return result;
}

}  // namespace graphmask
