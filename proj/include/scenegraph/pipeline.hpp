#pragma once

#include <scenegraph/cluster.hpp>
#include <scenegraph/factors.hpp>
#include <scenegraph/synthgen.hpp>
#include <scenegraph/train.hpp>

#include <array>
#include <span>
#include <vector>

namespace scenegraph {

/// 0/1 label per graph edge from the layout's room or wall ground truth.
std::vector<double> edge_labels(const ProximityGraph& graph, const Layout& layout, Relation relation);

TrainingExample make_example(const Layout& layout, Relation relation, std::size_t k = 15);

enum class Mode { kConservative, kGreedy };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

struct InferenceConfig {
  Mode mode = Mode::kConservative;
  ClusterConfig cluster;
  std::size_t k = 15;
  /// Run duplicate filtering and splitting on the input planes first.
  bool preprocess = false;
  DedupConfig dedup;
  SplitConfig split;

  double tau_room() const {
    return mode == Mode::kConservative ? cluster.tau_room_conservative : cluster.tau_room_greedy;
  }
};

struct EdgeScore {
  PlaneId src = 0;
  PlaneId dst = 0;
  double p_room = 0.0;
  double p_wall = 0.0;
  bool operator==(const EdgeScore&) const = default;
};

struct DetectedRoom {
  std::int64_t id = 0;
  std::vector<PlaneId> plane_ids;
  Vec2 center = Vec2::Zero();
  bool operator==(const DetectedRoom&) const = default;
};

struct DetectedWall {
  std::int64_t id = 0;
  std::array<PlaneId, 2> plane_ids{};
  Vec2 center = Vec2::Zero();
  double probability = 0.0;
  bool operator==(const DetectedWall&) const = default;
};

struct Prediction {
  Mode mode = Mode::kConservative;
  std::vector<EdgeScore> edges;
  std::vector<DetectedRoom> rooms;
  std::vector<DetectedWall> walls;
  bool operator==(const Prediction&) const = default;

  std::vector<RoomCluster> room_clusters() const;
  std::vector<WallPair> wall_pairs() const;
};

/// Proximity graph -> both classifiers -> room clustering and wall pairing ->
/// node centers. Fewer than two planes yields an empty prediction.
/// `planes_used` receives the (possibly preprocessed) planes when non-null.
Prediction infer(std::span<const PlaneFeature> planes, const EdgeClassifierModel& room_model,
                 const EdgeClassifierModel& wall_model, const InferenceConfig& config,
                 std::vector<PlaneFeature>* planes_used = nullptr);

/// Rooms/walls from existing edge scores (no network evaluation).
Prediction cluster_predictions(std::span<const PlaneFeature> planes, std::vector<EdgeScore> edges,
                               const InferenceConfig& config);

struct SceneBuild {
  SceneFactorGraph graph;
  std::vector<int> room_centers;  ///< center index per predicted room (-1 if skipped)
  std::vector<int> wall_centers;  ///< center index per predicted wall (-1 if skipped)
  std::vector<std::string> skipped;
};

/// Plane variables with priors at their measured values, plus one factor per
/// predicted room or wall. Degenerate rooms are skipped and listed.
SceneBuild build_scene_graph(std::span<const PlaneFeature> planes, const Prediction& prediction,
                             const Eigen::Matrix2d& prior_information = Eigen::Matrix2d::Identity() * 1e4);

}  // namespace scenegraph
