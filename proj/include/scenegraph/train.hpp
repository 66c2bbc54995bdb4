#pragma once

#include <scenegraph/model.hpp>

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace scenegraph {

struct TrainConfig {
  int epochs = 35;
  /// Layouts visited per epoch; 0 means the whole training set.
  std::size_t layouts_per_epoch = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  double pos_weight = 3.0;
  /// Probability threshold for the per-epoch held-out edge metrics.
  double eval_threshold = 0.5;
};

inline double default_pos_weight(Relation r) { return r == Relation::kSameRoom ? 3.0 : 5.0; }

void validate(const TrainConfig& config);

/// One layout graph (raw, unnormalized features) with a 0/1 label per edge.
struct TrainingExample {
  ProximityGraph graph;
  std::vector<double> labels;
};

struct EpochMetrics {
  int epoch = 0;
  double mean_loss = 0.0;
  double precision = std::numeric_limits<double>::quiet_NaN();
  double recall = std::numeric_limits<double>::quiet_NaN();
};

struct TrainReport {
  std::vector<EpochMetrics> epochs;
};

/// Edge-level precision/recall of `model` on raw examples.
std::pair<double, double> edge_precision_recall(const EdgeClassifierModel& model,
                                                std::span<const TrainingExample> examples, double threshold);

/// Fits the normalization on `train_set`, then runs Adam with one layout per
/// step in a seeded shuffled order. Held-out metrics are NaN when `heldout`
/// is empty. Throws InvalidArgument on an empty training set and
/// NumericError on a non-finite loss or gradient.
TrainReport train(EdgeClassifierModel& model, std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> heldout, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

}  // namespace scenegraph
