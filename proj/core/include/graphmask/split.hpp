#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphmask/graph.hpp"

namespace graphmask {

struct SplitRatios {
  double train = 0.7;
  double validation = 0.2;
  double test = 0.1;
};

/// benign:malicious, e.g. {9, 1}.
struct ClassRatio {
  double benign = 9.0;
  double malicious = 1.0;
  double malicious_fraction() const { return malicious / (benign + malicious); }
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

/// Stratified split: each class is shuffled and cut by `ratios` on its own,
/// then the pieces are merged, so every partition inherits the input's class
/// mix. With `class_ratio` set, the input's malicious fraction must already be
/// within 2 percentage points of it. Throws InvalidInput if any class would
/// leave a partition empty.
DatasetSplit split_dataset(const std::vector<FeatureGraph>& graphs, const SplitRatios& ratios,
                           const std::optional<ClassRatio>& class_ratio, std::uint64_t rng_seed);

/// Graphs whose ids are listed, in list order. Throws on unknown ids.
std::vector<FeatureGraph> select_graphs(const std::vector<FeatureGraph>& graphs,
                                        const std::vector<std::string>& ids);

}  // namespace graphmask
