#include "graphmask/metrics.hpp"

#include "graphmask/error.hpp"

namespace graphmask {

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  m.precision = tp + fp > 0 ? d(tp) / d(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? d(tp) / d(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  const std::size_t total = tp + fp + tn + fn;
  m.accuracy = total > 0 ? d(tp + tn) / d(total) : 0.0;
  return m;
}

Metrics evaluate(const ModelParams& params, const std::vector<FeatureGraph>& graphs) {
  if (graphs.empty()) throw InvalidInput("evaluate: no graphs");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& g : graphs) {
    const bool predicted = predict(g, params).label == Label::kMalicious;
    const bool actual = g.label == Label::kMalicious;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, tn, fn);
}

}  // namespace graphmask
