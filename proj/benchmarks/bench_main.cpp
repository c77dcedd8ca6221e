#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "graphmask/attacks.hpp"
#include "graphmask/synthetic.hpp"
#include "graphmask/training.hpp"

using namespace graphmask;

namespace {

std::vector<FeatureGraph> graphs_of_size(std::size_t nodes, std::size_t count) {
  SyntheticConfig c;
  c.n_graphs = count;
  c.min_nodes = nodes;
  c.max_nodes = nodes;
  c.malicious_fraction = 0.5;
  return generate_synthetic_dataset(c);
}

void BM_EncodeForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto gs = graphs_of_size(n, 1);
  const ModelParams p = init_params(FeatureSchema{}, 128, 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(encode(gs[0], gs[0].features, p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EncodeForward)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void BM_JointLossBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto gs = graphs_of_size(n, 1);
  const ModelParams p = init_params(FeatureSchema{}, 128, 2, 1);
  std::mt19937_64 rng(3);
  const MaskPlan plan = sample_mask(n, 0.5, rng);
  for (auto _ : state) {
    ad::Tape tape;
    const BoundParams bound = bind(tape, p, true);
    const GraphLoss loss = build_graph_loss(tape, bound, gs[0], LossWeights{}, &plan);
    benchmark::DoNotOptimize(collect_gradients(tape.backward(loss.total), bound, p));
  }
}
BENCHMARK(BM_JointLossBackward)->RangeMultiplier(2)->Range(8, 64);

void BM_SaliencyIG(benchmark::State& state) {
  const auto gs = graphs_of_size(16, 1);
  const ModelParams p = init_params(FeatureSchema{}, 64, 2, 1);
  const DetectorModel victim(p);
  const auto steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(edge_saliency_ig(victim, gs[0], steps));
}
BENCHMARK(BM_SaliencyIG)->Arg(5)->Arg(20)->Arg(50);

void BM_TrainEpoch(benchmark::State& state) {
  const auto train_set = graphs_of_size(16, 64);
  const auto val_set = graphs_of_size(16, 8);
  TrainConfig c;
  c.hidden = 32;
  c.max_epochs = 1;
  c.gamma = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(train(train_set, val_set, FeatureSchema{}, c));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * train_set.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
