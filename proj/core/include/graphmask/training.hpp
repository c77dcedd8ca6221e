#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "graphmask/autodiff.hpp"
#include "graphmask/graph.hpp"
#include "graphmask/losses.hpp"
#include "graphmask/metrics.hpp"
#include "graphmask/model.hpp"

namespace graphmask {

struct TrainConfig {
  double gamma = 0.8;
  double learning_rate = 0.001;
  std::size_t layers = 2;
  std::size_t hidden = 128;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::size_t max_epochs = 200;
  std::size_t early_stop_patience = 20;
  std::size_t batch_size = 16;
  std::uint64_t rng_seed = 1;
  Variant variant = Variant::kFull;

  void validate() const;
  /// minus_r / minus_cr force lambda1 to 0.
  LossWeights effective_weights() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double rec_loss = 0.0;
  double cl_loss = 0.0;
  double val_f1 = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t stopping_epoch = 0;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0.0;
  std::uint64_t mask_samples = 0;
  std::uint64_t decoder_passes = 0;
};

struct TrainResult {
  ModelParams params;  // the best-validation-F1 snapshot
  TrainReport report;
};

/// Tracks the best score; signals a stop once `patience` epochs pass without
/// a strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);
  /// Returns true when training should stop after this epoch.
  bool update(std::size_t epoch, double score);
  bool last_improved() const { return last_improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_score_ = -1.0;
  bool last_improved_ = false;
};

/// Loss terms for one graph recorded on `tape`.
struct GraphLoss {
  ad::Var total;
  std::optional<ad::Var> rec;
  ad::Var cl;
};

/// Training forward for one graph. With a mask plan: mask -> encode ->
/// remask -> decode for the reconstruction term, and the readout of that same
/// masked encoding for the classification term. Without one (or with a zero
/// reconstruction weight) only the encoder and classifier run.
GraphLoss build_graph_loss(ad::Tape& tape, const BoundParams& params, const FeatureGraph& g,
                           const LossWeights& weights, const MaskPlan* plan);

/// Per-epoch observer, e.g. for progress logging.
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Throws NumericError naming the epoch and graph if the loss diverges.
TrainResult train(const std::vector<FeatureGraph>& train_graphs,
                  const std::vector<FeatureGraph>& val_graphs, const FeatureSchema& schema,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Columns: epoch,train_loss,rec_loss,cl_loss,val_f1. Wall-clock time is kept
/// out of this file so reruns are byte-identical; see write_timing_csv.
void write_report_csv(std::ostream& out, const TrainReport& report);
/// Columns: epoch,seconds, then a total row.
void write_timing_csv(std::ostream& out, const TrainReport& report);

// --- grid search ------------------------------------------------------------

/// Empty lists fall back to the base config's value.
struct SearchSpace {
  std::vector<double> learning_rates;
  std::vector<double> gammas;
  std::vector<std::size_t> layers;
};

struct LeaderboardRow {
  std::size_t index = 0;  // enumeration order
  TrainConfig config;
  double val_f1 = 0.0;
  std::size_t stopping_epoch = 0;
};

struct GridSearchResult {
  TrainConfig best;
  /// Sorted by val F1 descending; ties keep the lower enumeration index first.
  std::vector<LeaderboardRow> leaderboard;
};

/// Enumerates learning rate (outer), mask rate, then layer count (inner),
/// running at most `budget` configurations in that order.
GridSearchResult grid_search(const SearchSpace& space, const TrainConfig& base,
                             const std::vector<FeatureGraph>& train_graphs,
                             const std::vector<FeatureGraph>& val_graphs,
                             const FeatureSchema& schema, std::size_t budget);

}  // namespace graphmask
