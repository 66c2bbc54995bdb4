#include <scenegraph/cluster.hpp>

#include <algorithm>

namespace scenegraph {

void validate(const ClusterConfig& c) {
  auto in_unit = [](double t) { return t > 0.0 && t <= 1.0; };
  if (!in_unit(c.tau_room_conservative) || !in_unit(c.tau_room_greedy) || !in_unit(c.tau_wall)) {
    throw InvalidArgument("ClusterConfig: thresholds must lie in (0, 1]");
  }
  if (c.cycle_sizes.empty()) throw InvalidArgument("ClusterConfig: cycle_sizes is empty");
  for (std::size_t i = 0; i < c.cycle_sizes.size(); ++i) {
    if (c.cycle_sizes[i] < 2) throw InvalidArgument("ClusterConfig: cycle sizes must be >= 2");
    if (i > 0 && c.cycle_sizes[i] >= c.cycle_sizes[i - 1]) {
      throw InvalidArgument("ClusterConfig: cycle_sizes must be strictly descending");
    }
  }
}

void EdgeGraph::add_edge(PlaneId src, PlaneId dst) {
  out_[src].insert(dst);
  out_[dst];
}

bool EdgeGraph::has_edge(PlaneId src, PlaneId dst) const {
  const auto it = out_.find(src);
  return it != out_.end() && it->second.count(dst) > 0;
}

void EdgeGraph::remove_node(PlaneId n) {
  out_.erase(n);
  for (auto& [_, succ] : out_) succ.erase(n);
}

std::vector<PlaneId> EdgeGraph::nodes() const {
  std::vector<PlaneId> v;
  v.reserve(out_.size());
  for (const auto& [n, _] : out_) v.push_back(n);
  return v;
}

const std::set<PlaneId>& EdgeGraph::successors(PlaneId n) const {
  static const std::set<PlaneId> kEmpty;
  const auto it = out_.find(n);
  return it == out_.end() ? kEmpty : it->second;
}

std::size_t EdgeGraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& [_, succ] : out_) n += succ.size();
  return n;
}

EdgeGraph threshold_edges(std::span<const EdgePrediction> preds, double tau) {
  EdgeGraph g;
  for (const auto& p : preds) {
    if (p.src != p.dst && p.probability >= tau) g.add_edge(p.src, p.dst);
  }
  return g;
}

namespace {

// Depth-first extension of `path` through nodes greater than path[0].
void extend(const EdgeGraph& g, std::vector<PlaneId>& path, std::set<PlaneId>& on_path, int length,
            std::set<std::vector<PlaneId>>& found) {
  const PlaneId start = path.front();
  const PlaneId last = path.back();
  if (static_cast<int>(path.size()) == length) {
    if (g.has_edge(last, start)) {
      std::vector<PlaneId> reversed{start};
      reversed.insert(reversed.end(), path.rbegin(), path.rend() - 1);
      found.insert(std::min(path, reversed));
    }
    return;
  }
  for (PlaneId next : g.successors(last)) {
    if (next <= start || on_path.count(next)) continue;
    path.push_back(next);
    on_path.insert(next);
    extend(g, path, on_path, length, found);
    on_path.erase(next);
    path.pop_back();
  }
}

}  // namespace

std::vector<std::vector<PlaneId>> find_cycles_of_size(const EdgeGraph& graph, int length) {
  if (length < 2) throw InvalidArgument("find_cycles_of_size: length must be >= 2");
  std::set<std::vector<PlaneId>> found;
  for (PlaneId start : graph.nodes()) {
    std::vector<PlaneId> path{start};
    std::set<PlaneId> on_path{start};
    extend(graph, path, on_path, length, found);
  }
  return {found.begin(), found.end()};
}

std::vector<RoomCluster> cluster_rooms(EdgeGraph graph, const ClusterConfig& config) {
  validate(config);
  std::vector<RoomCluster> accepted;
  std::set<PlaneId> used;
  for (int length : config.cycle_sizes) {
    std::map<std::vector<PlaneId>, int> support;
    for (auto cycle : find_cycles_of_size(graph, length)) {
      std::sort(cycle.begin(), cycle.end());
      ++support[cycle];
    }
    std::vector<std::pair<std::vector<PlaneId>, int>> ranked(support.begin(), support.end());
    // std::map iteration is lexicographic, so a stable sort on count keeps
    // lexicographic order among ties.
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [set, count] : ranked) {
      if (std::any_of(set.begin(), set.end(), [&](PlaneId p) { return used.count(p) > 0; })) continue;
      accepted.push_back(RoomCluster{set});
      for (PlaneId p : set) {
        used.insert(p);
        graph.remove_node(p);
      }
    }
  }
  return accepted;
}

std::vector<WallPair> pair_walls(std::span<const EdgePrediction> preds, const ClusterConfig& config,
                                 std::span<const PlaneFeature> planes) {
  std::map<PlaneId, const PlaneFeature*> by_id;
  for (const auto& p : planes) by_id[p.id] = &p;

  std::vector<WallPair> candidates;
  for (const auto& e : preds) {
    if (e.src == e.dst || e.probability < config.tau_wall) continue;
    if (config.wall_antiparallel_filter) {
      const auto a = by_id.find(e.src), b = by_id.find(e.dst);
      if (a == by_id.end() || b == by_id.end()) continue;
      if (!(a->second->normal.dot(b->second->normal) < -config.wall_antiparallel_min)) continue;
    }
    candidates.push_back({{std::min(e.src, e.dst), std::max(e.src, e.dst)}, e.probability});
  }
  std::sort(candidates.begin(), candidates.end(), [](const WallPair& a, const WallPair& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.plane_ids < b.plane_ids;
  });

  std::set<PlaneId> used;
  std::vector<WallPair> walls;
  for (const auto& c : candidates) {
    if (used.count(c.plane_ids[0]) || used.count(c.plane_ids[1])) continue;
    used.insert(c.plane_ids.begin(), c.plane_ids.end());
    walls.push_back(c);
  }
  return walls;
}

}  // namespace scenegraph
