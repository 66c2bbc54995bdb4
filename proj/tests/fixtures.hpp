#pragma once

#include <scenegraph/io.hpp>

#include <random>

namespace fixtures {

/// Model with every parameter and normalization entry drawn at random, so
/// that serialization exercises full-precision values.
inline scenegraph::Checkpoint random_checkpoint(std::uint64_t seed) {
  using namespace scenegraph;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> hidden(1, 12);
  Checkpoint c{EdgeClassifierModel(seed % 2 ? Relation::kSameWall : Relation::kSameRoom, hidden(rng), seed), {}};
  for (auto& p : c.model.parameters()) {
    for (Eigen::Index i = 0; i < p.value->size(); ++i) p.value->data()[i] = g(rng) * std::exp(4 * g(rng));
  }
  for (auto* v : {&c.model.norm.node_mean, &c.model.norm.edge_mean}) {
    for (auto& x : *v) x = g(rng);
  }
  for (auto* v : {&c.model.norm.node_std, &c.model.norm.edge_std}) {
    for (auto& x : *v) x = std::abs(g(rng)) + 1e-3;
  }
  c.train_config.epochs = static_cast<int>(rng() % 100) + 1;
  c.train_config.learning_rate = std::abs(g(rng)) * 1e-3;
  c.train_config.seed = rng();
  c.train_config.pos_weight = std::abs(g(rng)) + 1.0;
  return c;
}

}  // namespace fixtures
