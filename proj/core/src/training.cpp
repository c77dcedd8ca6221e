#include "graphmask/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "graphmask/error.hpp"
#include "graphmask/optimizer.hpp"

namespace graphmask {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("gamma must lie in (0,1)");
  if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be > 0");
  if (layers < 1) throw InvalidInput("layers must be >= 1");
  if (hidden < 1) throw InvalidInput("hidden must be >= 1");
  if (max_epochs < 1) throw InvalidInput("max_epochs must be >= 1");
  if (early_stop_patience < 1) throw InvalidInput("early_stop_patience must be >= 1");
  if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
  effective_weights().validate();
}

LossWeights TrainConfig::effective_weights() const {
  LossWeights w{lambda1, lambda2};
  if (!uses_reconstruction(variant)) w.lambda1 = 0.0;
  return w;
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience < 1) throw InvalidInput("patience must be >= 1");
}

bool EarlyStopping::update(std::size_t epoch, double score) {
  last_improved_ = score > best_score_;
  if (last_improved_) {
    best_score_ = score;
    best_epoch_ = epoch;
  }
  return epoch - best_epoch_ >= patience_;
}

GraphLoss build_graph_loss(ad::Tape& tape, const BoundParams& params, const FeatureGraph& g,
                           const LossWeights& weights, const MaskPlan* plan) {
  const Propagation prop = Propagation::from_graph(g);
  const ad::Var x = tape.constant(g.features);
  const bool reconstruct = plan != nullptr && !plan->empty() && weights.lambda1 > 0.0;

  const ad::Var input = reconstruct ? apply_mask(tape, x, *plan, params.mask_token) : x;
  const ad::Var h = encode(tape, prop, input, params);

  GraphLoss loss;
  if (reconstruct) {
    const ad::Var z = decode(tape, prop, remask(tape, h, *plan), params);
    loss.rec = reconstruction_loss(tape, x, z, *plan);
  }
  const ad::Var pooled = readout(tape, h);
  if (params.head) {
    loss.cl = tape.softmax_cross_entropy(head_logits(tape, pooled, *params.head),
                                         static_cast<std::size_t>(to_int(g.label)));
  } else {
    loss.cl = contrastive_loss(tape, pooled, g.label, params.proxy_benign, params.proxy_malicious);
  }
  if (loss.rec) {
    loss.total = joint_loss(tape, *loss.rec, loss.cl, weights);
  } else {
    loss.total = tape.scale(loss.cl, weights.lambda2);
  }
  return loss;
}

namespace {

std::vector<Matrix*> tensor_pointers(ModelParams& p) {
  std::vector<Matrix*> out;
  p.for_each_tensor([&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

void check_schema(const std::vector<FeatureGraph>& graphs, const FeatureSchema& schema,
                  const char* which) {
  for (const auto& g : graphs) {
    if (g.feature_width() != schema.width()) {
      throw InvalidInput(std::string(which) + " graph '" + g.graph_id + "' has feature width " +
                         std::to_string(g.feature_width()) + ", schema expects " +
                         std::to_string(schema.width()));
    }
    if (g.node_count == 0) throw InvalidInput(std::string(which) + " graph '" + g.graph_id + "' is empty");
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TrainResult train(const std::vector<FeatureGraph>& train_graphs,
                  const std::vector<FeatureGraph>& val_graphs, const FeatureSchema& schema,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_graphs.empty() || val_graphs.empty()) {
    throw InvalidInput("training needs nonempty train and validation sets");
  }
  check_schema(train_graphs, schema, "train");
  check_schema(val_graphs, schema, "validation");

  const LossWeights weights = config.effective_weights();
  const bool masking = uses_reconstruction(config.variant) && weights.lambda1 > 0.0;

  ModelParams params =
      init_params(schema, config.hidden, config.layers, config.rng_seed, config.variant);
  // Separate stream from initialization so changing the shuffle does not
  // change the starting weights.
  std::mt19937_64 rng(config.rng_seed ^ 0x5deece66dULL);
  Adam adam(AdamOptions{.learning_rate = config.learning_rate});
  EarlyStopping stopper(config.early_stop_patience);

  auto& counters = forward_counters();
  const auto masks_before = counters.mask_samples.load();
  const auto decodes_before = counters.decoder_passes.load();

  TrainResult result;
  result.params = params;
  auto param_ptrs = tensor_pointers(params);

  std::vector<std::size_t> order(train_graphs.size());
  std::iota(order.begin(), order.end(), 0);
  const auto n = static_cast<double>(train_graphs.size());

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0, rec_sum = 0.0, cl_sum = 0.0;

    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);
      ModelParams acc = zeros_like(params);
      auto acc_ptrs = tensor_pointers(acc);

      for (std::size_t k = begin; k < end; ++k) {
        const FeatureGraph& g = train_graphs[order[k]];
        try {
          ad::Tape tape;
          const BoundParams bound = bind(tape, params, true);
          std::optional<MaskPlan> plan;
          if (masking && g.node_count >= 2) plan = sample_mask(g.node_count, config.gamma, rng);
          const GraphLoss loss =
              build_graph_loss(tape, bound, g, weights, plan ? &*plan : nullptr);
          loss_sum += tape.scalar(loss.total);
          cl_sum += tape.scalar(loss.cl);
          if (loss.rec) rec_sum += tape.scalar(*loss.rec);

          const ModelParams grad =
              collect_gradients(tape.backward(loss.total), bound, params);
          std::size_t i = 0;
          grad.for_each_tensor([&](const std::string&, const Matrix& m) {
            *acc_ptrs[i++] += inv_batch * m;
          });
        } catch (const NumericError& e) {
          throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                             " on graph '" + g.graph_id + "': " + e.what());
        }
      }
      std::vector<const Matrix*> grad_ptrs(acc_ptrs.begin(), acc_ptrs.end());
      adam.step(param_ptrs, grad_ptrs);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / n;
    rec.rec_loss = rec_sum / n;
    rec.cl_loss = cl_sum / n;
    if (!std::isfinite(rec.train_loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    try {
      rec.val_f1 = evaluate(params, val_graphs).f1;
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                         " during validation: " + e.what());
    }
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const bool stop = stopper.update(epoch, rec.val_f1);
    if (stopper.last_improved()) result.params = params;
    if (stop) break;
  }

  auto& report = result.report;
  report.stopping_epoch = report.epochs.back().epoch;
  report.best_epoch = stopper.best_epoch();
  report.best_val_f1 = stopper.best_score();
  report.mask_samples = counters.mask_samples.load() - masks_before;
  report.decoder_passes = counters.decoder_passes.load() - decodes_before;
  return result;
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,train_loss,rec_loss,cl_loss,val_f1\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << fmt_double(e.train_loss) << ',' << fmt_double(e.rec_loss) << ','
        << fmt_double(e.cl_loss) << ',' << fmt_double(e.val_f1) << '\n';
  }
}

void write_timing_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,seconds\n";
  double total = 0.0;
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << fmt_double(e.seconds) << '\n';
    total += e.seconds;
  }
  out << "total," << fmt_double(total) << '\n';
}

GridSearchResult grid_search(const SearchSpace& space, const TrainConfig& base,
                             const std::vector<FeatureGraph>& train_graphs,
                             const std::vector<FeatureGraph>& val_graphs,
                             const FeatureSchema& schema, std::size_t budget) {
  if (budget == 0) throw InvalidInput("grid search budget must be >= 1");
  if (space.learning_rates.empty() && space.gammas.empty() && space.layers.empty()) {
    throw InvalidInput("grid search space is empty");
  }
  const auto lrs = space.learning_rates.empty() ? std::vector{base.learning_rate} : space.learning_rates;
  const auto gammas = space.gammas.empty() ? std::vector{base.gamma} : space.gammas;
  const auto layers = space.layers.empty() ? std::vector{base.layers} : space.layers;

  std::vector<TrainConfig> configs;
  for (double lr : lrs) {
    for (double gamma : gammas) {
      for (std::size_t l : layers) {
        TrainConfig c = base;
        c.learning_rate = lr;
        c.gamma = gamma;
        c.layers = l;
        configs.push_back(c);
      }
    }
  }
  if (configs.size() > budget) configs.resize(budget);

  GridSearchResult result;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const TrainResult run = train(train_graphs, val_graphs, schema, configs[i]);
    result.leaderboard.push_back(
        LeaderboardRow{i, configs[i], run.report.best_val_f1, run.report.stopping_epoch});
  }
  std::stable_sort(result.leaderboard.begin(), result.leaderboard.end(),
                   [](const LeaderboardRow& a, const LeaderboardRow& b) { return a.val_f1 > b.val_f1; });
  result.best = result.leaderboard.front().config;
  return result;
}

}  // namespace graphmask
