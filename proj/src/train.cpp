#include <scenegraph/train.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace scenegraph {

void validate(const TrainConfig& c) {
  if (c.epochs < 1) throw InvalidArgument("TrainConfig: epochs must be >= 1");
  if (!(c.learning_rate > 0.0)) throw InvalidArgument("TrainConfig: learning_rate must be > 0");
  if (!(c.pos_weight > 0.0)) throw InvalidArgument("TrainConfig: pos_weight must be > 0");
}

std::pair<double, double> edge_precision_recall(const EdgeClassifierModel& model,
                                                std::span<const TrainingExample> examples, double threshold) {
  double tp = 0, fp = 0, fn = 0;
  for (const auto& ex : examples) {
    if (ex.graph.num_edges() == 0) continue;
    const Vector p = predict_proba(model, ex.graph);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const bool predicted = p(k) >= threshold;
      const bool truth = ex.labels[static_cast<std::size_t>(k)] > 0.5;
      tp += predicted && truth;
      fp += predicted && !truth;
      fn += !predicted && truth;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {tp + fp > 0 ? tp / (tp + fp) : nan, tp + fn > 0 ? tp / (tp + fn) : nan};
}

TrainReport train(EdgeClassifierModel& model, std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> heldout, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
  validate(config);
  if (train_set.empty()) throw InvalidArgument("train: empty dataset");

  std::vector<ProximityGraph> raw;
  raw.reserve(train_set.size());
  for (const auto& ex : train_set) raw.push_back(ex.graph);
  model.norm = fit_normalize(raw);
  std::vector<ProximityGraph> normalized;
  normalized.reserve(raw.size());
  for (auto& g : raw) normalized.push_back(apply_normalize(std::move(g), model.norm));

  auto params = model.parameters();
  std::vector<Matrix> m1, m2;
  for (const auto& p : params) {
    m1.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    m2.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t per_epoch =
      config.layouts_per_epoch == 0 ? order.size() : std::min(config.layouts_per_epoch, order.size());

  TrainReport report;
  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < per_epoch; ++i) {
      const std::size_t idx = order[i];
      const auto& graph = normalized[idx];
      if (graph.num_edges() == 0) continue;
      Gradients g;
      try {
        g = backward(model, graph, train_set[idx].labels, config.pos_weight);
      } catch (const NumericError& e) {
        std::ostringstream msg;
        msg << e.what() << " (epoch " << epoch << ", layout " << idx << ")";
        throw NumericError(msg.str());
      }
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < params.size(); ++p) {
        m1[p] = config.beta1 * m1[p] + (1.0 - config.beta1) * g.grads[p];
        m2[p] = config.beta2 * m2[p] + (1.0 - config.beta2) * g.grads[p].cwiseProduct(g.grads[p]);
        *params[p].value -= (config.learning_rate * (m1[p].array() / bc1) /
                             ((m2[p].array() / bc2).sqrt() + config.adam_eps)).matrix();
      }
      loss_sum += g.loss;
      ++seen;
    }
    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.mean_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
    if (!heldout.empty()) {
      std::tie(metrics.precision, metrics.recall) = edge_precision_recall(model, heldout, config.eval_threshold);
    }
    report.epochs.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
  }
  return report;
}

}  // namespace scenegraph
