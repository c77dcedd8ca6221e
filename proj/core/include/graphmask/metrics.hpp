#pragma once

#include <cstddef>
#include <vector>

#include "graphmask/graph.hpp"
#include "graphmask/model.hpp"

namespace graphmask {

/// Detection metrics with malicious as the positive class. Ratios whose
/// denominator is zero are reported as 0.
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

/// Confusion counts from `predict` over every graph.
Metrics evaluate(const ModelParams& params, const std::vector<FeatureGraph>& graphs);

}  // namespace graphmask
