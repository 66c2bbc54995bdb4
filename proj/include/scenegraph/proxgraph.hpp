#pragma once

#include <scenegraph/geometry.hpp>

#include <span>
#include <utility>
#include <vector>

namespace scenegraph {

inline constexpr int kNodeFeatureDim = 3;
inline constexpr int kEdgeFeatureDim = 3;

/// Directed proximity graph over planes. Rows of `node_feats` are
/// [n_x, n_y, width]; rows of `edge_feats` are [c_dst - c_src, cd].
struct ProximityGraph {
  std::vector<PlaneId> node_ids;
  Matrix node_feats;
  std::vector<std::pair<int, int>> edges;
  Matrix edge_feats;

  std::size_t num_nodes() const { return node_ids.size(); }
  std::size_t num_edges() const { return edges.size(); }
};

/// Per-column z-score statistics for node and edge features.
struct NormStats {
  Eigen::RowVectorXd node_mean = Eigen::RowVectorXd::Zero(kNodeFeatureDim);
  Eigen::RowVectorXd node_std = Eigen::RowVectorXd::Ones(kNodeFeatureDim);
  Eigen::RowVectorXd edge_mean = Eigen::RowVectorXd::Zero(kEdgeFeatureDim);
  Eigen::RowVectorXd edge_std = Eigen::RowVectorXd::Ones(kEdgeFeatureDim);

  bool operator==(const NormStats&) const = default;
};

inline constexpr double kMinStd = 1e-6;

/// Minimum distance over the four endpoint pairs.
double closest_segment_distance(const PlaneFeature& a, const PlaneFeature& b);

/// k-NN by centroid distance (ties by index), symmetrized. Edges are sorted by
/// (src, dst).
ProximityGraph build_graph(std::span<const PlaneFeature> planes, std::size_t k = 15);

NormStats fit_normalize(std::span<const ProximityGraph> graphs);
ProximityGraph apply_normalize(ProximityGraph graph, const NormStats& stats);

}  // namespace scenegraph
