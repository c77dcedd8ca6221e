#include "graphmask/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "graphmask/error.hpp"

namespace graphmask {

DatasetSplit split_dataset(const std::vector<FeatureGraph>& graphs, const SplitRatios& ratios,
                           const std::optional<ClassRatio>& class_ratio, std::uint64_t rng_seed) {
  const double total = ratios.train + ratios.validation + ratios.test;
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("split ratios must sum to 1");
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0) {
    throw InvalidInput("split ratios must be non-negative");
  }

  std::vector<std::string> by_class[2];
  for (const auto& g : graphs) by_class[to_int(g.label)].push_back(g.graph_id);

  if (class_ratio) {
    if (class_ratio->benign <= 0 || class_ratio->malicious <= 0) {
      throw InvalidInput("class ratio terms must be positive");
    }
    const double have = graphs.empty() ? 0.0
                                       : static_cast<double>(by_class[1].size()) /
                                             static_cast<double>(graphs.size());
    if (std::abs(have - class_ratio->malicious_fraction()) > 0.02) {
      throw InvalidInput("dataset malicious fraction " + std::to_string(have) +
                         " is not within 2 points of the requested class ratio");
    }
  }

  std::mt19937_64 rng(rng_seed);
  DatasetSplit split;
  for (int cls = 0; cls < 2; ++cls) {
    auto& ids = by_class[cls];
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n = static_cast<double>(ids.size());
    const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
    const auto n_val = static_cast<std::size_t>(std::llround(ratios.validation * n));
    if (n_train + n_val >= ids.size() || n_train == 0 || n_val == 0) {
      throw InvalidInput(std::string("insufficient ") + (cls == 1 ? "malicious" : "benign") +
                         " graphs (" + std::to_string(ids.size()) +
                         ") to populate train/validation/test");
    }
    split.train.insert(split.train.end(), ids.begin(), ids.begin() + n_train);
    split.validation.insert(split.validation.end(), ids.begin() + n_train,
                            ids.begin() + n_train + n_val);
    split.test.insert(split.test.end(), ids.begin() + n_train + n_val, ids.end());
  }
  return split;
}

std::vector<FeatureGraph> select_graphs(const std::vector<FeatureGraph>& graphs,
                                        const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const FeatureGraph*> index;
  for (const auto& g : graphs) index.emplace(g.graph_id, &g);
  std::vector<FeatureGraph> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw InvalidInput("unknown graph id '" + id + "'");
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace graphmask
