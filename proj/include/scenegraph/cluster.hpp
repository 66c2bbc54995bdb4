#pragma once

#include <scenegraph/geometry.hpp>

#include <map>
#include <set>
#include <span>
#include <vector>

namespace scenegraph {

struct EdgePrediction {
  PlaneId src = 0;
  PlaneId dst = 0;
  double probability = 0.0;
  Relation relation = Relation::kSameRoom;
};

struct ClusterConfig {
  double tau_room_conservative = 0.7;
  double tau_room_greedy = 0.5;
  double tau_wall = 0.5;
  /// Cycle sizes tried in order; larger rooms take priority.
  std::vector<int> cycle_sizes{4, 2};
  double wall_antiparallel_min = 0.9;
  bool wall_antiparallel_filter = true;
};

void validate(const ClusterConfig& config);

/// Plane IDs of one detected room, sorted ascending.
struct RoomCluster {
  std::vector<PlaneId> plane_ids;
  bool operator==(const RoomCluster&) const = default;
  auto operator<=>(const RoomCluster&) const = default;
};

struct WallPair {
  std::array<PlaneId, 2> plane_ids{};  ///< sorted ascending
  double probability = 0.0;
  bool operator==(const WallPair&) const = default;
};

/// Directed graph keyed by plane ID.
class EdgeGraph {
 public:
  void add_node(PlaneId n) { out_[n]; }
  void add_edge(PlaneId src, PlaneId dst);
  bool has_edge(PlaneId src, PlaneId dst) const;
  void remove_node(PlaneId n);
  std::vector<PlaneId> nodes() const;
  const std::set<PlaneId>& successors(PlaneId n) const;
  std::size_t num_edges() const;

 private:
  std::map<PlaneId, std::set<PlaneId>> out_;
};

/// Keeps predictions with probability >= tau.
EdgeGraph threshold_edges(std::span<const EdgePrediction> preds, double tau);

/// All simple directed cycles through exactly `length` distinct nodes. A
/// cycle and its reversal count once; each cycle is returned rotated to
/// start at its smallest ID, in the lexicographically smaller of its two
/// orientations. Output is sorted.
std::vector<std::vector<PlaneId>> find_cycles_of_size(const EdgeGraph& graph, int length);

/// Cycle-based room clustering. For each size in `cycle_sizes`: enumerate
/// cycles, count how many cycles share each node set, visit sets by
/// descending count (ties: lexicographic), accept those disjoint from all
/// accepted clusters and remove their nodes from the graph.
std::vector<RoomCluster> cluster_rooms(EdgeGraph graph, const ClusterConfig& config);

/// Greedy matching of same-wall edges by descending probability, optionally
/// requiring anti-parallel normals. Each plane joins at most one wall.
std::vector<WallPair> pair_walls(std::span<const EdgePrediction> preds, const ClusterConfig& config,
                                 std::span<const PlaneFeature> planes);

}  // namespace scenegraph
